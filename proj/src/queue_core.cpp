#include "segq/queue_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "segq/error.hpp"

namespace segq {

namespace {

constexpr double rescale_above = 1e150;
constexpr double max_fixed_point_residual = 1e-10;

const ServiceDistribution& region_service(const ServiceSpec& services, std::size_t region)
{
    if (region >= services.size())
        throw InvalidArgument("region index " + std::to_string(region) + " out of range (T = " +
                              std::to_string(services.size()) + ")");
    return services[region];
}

void check_distribution(std::span<const double> p, const ThresholdPolicy& policy)
{
    if (p.size() != static_cast<std::size_t>(policy.capacity()) + 1)
        throw InvalidArgument("distribution length does not match K + 1");
}

// tail[n] = sum_{j >= n} pmf_j for n = 0..count-1.
std::vector<double> tail_table(const ServiceDistribution& service, double arrival_rate,
                               const std::vector<double>& pmf, int count, bool residual)
{
    std::vector<double> tail(static_cast<std::size_t>(count));
    const bool closed = service.has_closed_form() && !(residual && service.is_deterministic());
    double head = 0.0;
    for (int n = 0; n < count; ++n) {
        if (closed) {
            tail[static_cast<std::size_t>(n)] = service.arrivals_tail(arrival_rate, n);
        } else {
            tail[static_cast<std::size_t>(n)] = std::max(0.0, 1.0 - head);
            if (static_cast<std::size_t>(n) < pmf.size())
                head += pmf[static_cast<std::size_t>(n)];
        }
    }
    return tail;
}

// Per-region service mean charged to post-departure state i.
std::vector<double> state_service_means(const ThresholdPolicy& policy, const ServiceSpec& services)
{
    std::vector<double> means(static_cast<std::size_t>(policy.capacity()) + 1);
    for (int i = 0; i <= policy.capacity(); ++i)
        means[static_cast<std::size_t>(i)] = services[policy.region_of(i)].mean();
    return means;
}

template <class Term>
double staircase_sum(std::span<const double> p, const ThresholdPolicy& policy, Term&& term)
{
    const std::size_t regions = policy.region_count();
    double total = 0.0;
    for (std::size_t k = 0; k < regions; ++k) {
        const int first = policy.staircase_start(k);
        // The last band runs through K so that every post-departure state is charged.
        const int last = k + 1 < regions ? policy.staircase_start(k + 1) - 1 : policy.capacity();
        for (int i = first; i <= last; ++i)
            total += p[static_cast<std::size_t>(i)] * term(k, i);
    }
    return total;
}

} // namespace

void check_region_count(const ThresholdPolicy& policy, const ServiceSpec& services)
{
    if (services.size() != policy.region_count())
        throw InvalidArgument("policy defines " + std::to_string(policy.region_count()) + " regions but " +
                              std::to_string(services.size()) + " service laws were given");
}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd values) : values_(std::move(values))
{
    if (values_.rows() != values_.cols() || values_.rows() < 2)
        throw InvalidArgument("transition matrix must be square with at least two states");
}

double TransitionMatrix::stochasticity_error() const
{
    return (values_.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double PostDepartureDist::fixed_point_residual(const TransitionMatrix& matrix) const
{
    Eigen::Map<const Eigen::RowVectorXd> row(probabilities.data(), static_cast<Eigen::Index>(probabilities.size()));
    return (row * matrix.values() - row).cwiseAbs().maxCoeff();
}

double arrivals_during_service(const ServiceSpec& services, std::size_t region, int n, const ArrivalSpec& arrivals)
{
    return region_service(services, region).arrivals_pmf(arrivals.rate, n);
}

double tail_probability(const ServiceSpec& services, std::size_t region, int n, const ArrivalSpec& arrivals)
{
    return region_service(services, region).arrivals_tail(arrivals.rate, n);
}

double residual_arrival_probability(const ServiceSpec& services, std::size_t region, int n,
                                    const ArrivalSpec& arrivals)
{
    return region_service(services, region).residual_arrivals_pmf(arrivals.rate, n);
}

TransitionMatrix build_embedded_matrix(const ThresholdPolicy& policy, const ServiceSpec& services,
                                       const ArrivalSpec& arrivals)
{
    check_region_count(policy, services);
    const int capacity = policy.capacity();
    const int count = capacity + 2;

    std::vector<std::vector<double>> pmf;
    std::vector<std::vector<double>> tail;
    for (const auto& service : services) {
        pmf.push_back(service.arrivals_pmf_table(arrivals.rate, count));
        tail.push_back(tail_table(service, arrivals.rate, pmf.back(), count, false));
    }

    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(capacity + 1, capacity + 1);
    for (int i = 0; i <= capacity; ++i) {
        const std::size_t region = policy.region_of(i);
        // A departure leaving 0 behind is followed by a service that starts with
        // one packet, exactly like leaving 1 behind.
        const int start = std::max(i, 1);
        for (int j = start - 1; j < capacity; ++j)
            values(i, j) = pmf[region][static_cast<std::size_t>(j - start + 1)];
        values(i, capacity) = tail[region][static_cast<std::size_t>(capacity - start + 1)];
    }
    return TransitionMatrix(std::move(values));
}

PostDepartureDist solve_stationary(const TransitionMatrix& matrix)
{
    const Eigen::MatrixXd& P = matrix.values();
    const Eigen::Index n = P.rows();
    for (Eigen::Index i = 2; i < n; ++i)
        for (Eigen::Index j = 0; j + 1 < i; ++j)
            if (P(i, j) != 0.0)
                throw InvalidArgument("transition matrix must only step down by one state per departure");

    // Gaussian elimination of the balance equations in GTH order. Because the
    // chain moves down at most one state per step, eliminating states K, K-1, ...
    // reduces to the cut equations
    //   p_m P(m, m-1) = sum_{i<m} p_i sum_{j>=m} P(i, j),
    // which involve no subtractions and keep every entry accurate even when the
    // probabilities span hundreds of orders of magnitude.
    Eigen::MatrixXd tails = P;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = n - 2; j >= 0; --j)
            tails(i, j) += tails(i, j + 1);

    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    p[0] = 1.0;
    for (Eigen::Index m = 1; m < n; ++m) {
        const double down = P(m, m - 1);
        if (!(down > 0.0)) {
            std::ostringstream msg;
            msg << "stationary system is singular: state " << m << " cannot move down";
            throw ModelError(msg.str());
        }
        double up = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            up += p[static_cast<std::size_t>(i)] * tails(i, m);
        p[static_cast<std::size_t>(m)] = up / down;
        if (p[static_cast<std::size_t>(m)] > rescale_above) {
            for (Eigen::Index i = 0; i <= m; ++i)
                p[static_cast<std::size_t>(i)] /= rescale_above;
        }
    }

    double total = 0.0;
    for (double value : p)
        total += value;
    PostDepartureDist dist;
    dist.probabilities = std::move(p);
    for (auto& value : dist.probabilities)
        value /= total;
    dist.residual = dist.fixed_point_residual(matrix);
    if (!(dist.residual < max_fixed_point_residual)) {
        std::ostringstream msg;
        msg << "stationary solve is inaccurate (fixed-point residual " << dist.residual << ")";
        throw ModelError(msg.str());
    }
    return dist;
}

double mean_departure_interval(std::span<const double> p, const ServiceSpec& services, const ArrivalSpec& arrivals,
                               const ThresholdPolicy& policy)
{
    check_region_count(policy, services);
    check_distribution(p, policy);
    const auto means = state_service_means(policy, services);
    double total = p[0] / arrivals.rate;
    for (std::size_t i = 0; i < p.size(); ++i)
        total += p[i] * means[i];
    return total;
}

double carried_load(std::span<const double> p, const ServiceSpec& services, const ThresholdPolicy& policy,
                    double mean_interval)
{
    check_region_count(policy, services);
    check_distribution(p, policy);
    if (!(mean_interval > 0.0))
        throw InvalidArgument("mean departure interval must be positive");
    const auto means = state_service_means(policy, services);
    double busy = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        busy += p[i] * means[i];
    return busy / mean_interval;
}

double mean_system_time(std::span<const double> p, const ThresholdPolicy& policy, const ServiceSpec& services,
                        DelayVariant variant)
{
    check_region_count(policy, services);
    check_distribution(p, policy);
    const std::size_t regions = policy.region_count();
    // Time spent in the full bands below region k.
    std::vector<double> below(regions, 0.0);
    for (std::size_t k = 1; k < regions; ++k)
        below[k] = below[k - 1] +
                   (policy.staircase_start(k) - policy.staircase_start(k - 1)) * services[k - 1].mean();

    return staircase_sum(p, policy, [&](std::size_t k, int i) {
        if (k == 0)
            return (variant == DelayVariant::AheadOnly ? i : i + 1) * services[0].mean();
        return (i + 1 - policy.staircase_start(k)) * services[k].mean() + below[k];
    });
}

double system_time_lst(std::span<const double> p, const ThresholdPolicy& policy, const ServiceSpec& services,
                       double s)
{
    check_region_count(policy, services);
    check_distribution(p, policy);
    if (!(s >= 0.0))
        throw InvalidArgument("transform argument must be non-negative");
    const std::size_t regions = policy.region_count();
    std::vector<double> transform(regions);
    std::vector<double> below(regions, 1.0);
    for (std::size_t k = 0; k < regions; ++k)
        transform[k] = services[k].lst(s);
    for (std::size_t k = 1; k < regions; ++k)
        below[k] = below[k - 1] *
                   std::pow(transform[k - 1], policy.staircase_start(k) - policy.staircase_start(k - 1));

    return staircase_sum(p, policy, [&](std::size_t k, int i) {
        return std::pow(transform[k], i + 1 - policy.staircase_start(k)) * below[k];
    });
}

ArbitraryEpochDist arbitrary_epoch_distribution(std::span<const double> p, double carried_load,
                                                const ThresholdPolicy& policy, const ServiceSpec& services,
                                                const ArrivalSpec& arrivals, EpochMode mode)
{
    check_region_count(policy, services);
    check_distribution(p, policy);
    if (!(carried_load > 0.0 && carried_load <= 1.0 + 1e-12))
        throw InvalidArgument("carried load must lie in (0, 1]");

    const int capacity = policy.capacity();
    const int count = capacity + 2;
    std::vector<std::vector<double>> pmf;
    std::vector<std::vector<double>> tail;
    for (const auto& service : services) {
        pmf.push_back(service.residual_arrivals_pmf_table(arrivals.rate, count));
        tail.push_back(tail_table(service, arrivals.rate, pmf.back(), count, true));
    }

    ArbitraryEpochDist dist;
    dist.mode = mode;
    dist.probabilities.assign(static_cast<std::size_t>(capacity) + 1, 0.0);
    for (int j = 0; j < capacity; ++j) {
        double value = p[0] * pmf[0][static_cast<std::size_t>(j)];
        for (int i = 1; i <= j + 1; ++i)
            value += p[static_cast<std::size_t>(i)] * pmf[policy.region_of(i)][static_cast<std::size_t>(j - i + 1)];
        dist.probabilities[static_cast<std::size_t>(j)] = carried_load * value;
    }
    double last = p[0] * tail[0][static_cast<std::size_t>(capacity)];
    for (int i = 1; i <= capacity; ++i)
        last += p[static_cast<std::size_t>(i)] * tail[policy.region_of(i)][static_cast<std::size_t>(capacity - i + 1)];
    dist.probabilities[static_cast<std::size_t>(capacity)] = carried_load * last;

    if (mode == EpochMode::Renormalized) {
        double total = 0.0;
        for (double value : dist.probabilities)
            total += value;
        dist.probabilities[0] += 1.0 - total;
    }
    return dist;
}

QueueAnalysis analyze_queue(const ThresholdPolicy& policy, const ServiceSpec& services, const ArrivalSpec& arrivals,
                            DelayVariant variant, EpochMode mode)
{
    QueueAnalysis result;
    result.post_departure = solve_stationary(build_embedded_matrix(policy, services, arrivals));
    const auto& p = result.post_departure.probabilities;

    auto& delay = result.delay;
    delay.mean_departure_interval = mean_departure_interval(p, services, arrivals, policy);
    delay.carried_load = carried_load(p, services, policy, delay.mean_departure_interval);
    delay.mean_system_time_ahead_only = mean_system_time(p, policy, services, DelayVariant::AheadOnly);
    delay.mean_system_time_lst_consistent = mean_system_time(p, policy, services, DelayVariant::LstConsistent);
    delay.mean_system_time = variant == DelayVariant::AheadOnly ? delay.mean_system_time_ahead_only
                                                                   : delay.mean_system_time_lst_consistent;
    result.arbitrary_epoch = arbitrary_epoch_distribution(p, delay.carried_load, policy, services, arrivals, mode);
    return result;
}

} // namespace segq
