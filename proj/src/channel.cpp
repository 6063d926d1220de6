#include "segq/channel.hpp"

#include <cmath>
#include <sstream>

#include "segq/error.hpp"

namespace segq {

namespace {

constexpr double fixed_point_tolerance = 1e-12;
constexpr int iteration_cap = 10000;

} // namespace

ChannelSpec::ChannelSpec(double rate_, int queues_) : rate(rate_), queues(queues_)
{
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw InvalidArgument("channel rate must be positive and finite");
    if (queues < 1)
        throw InvalidArgument("channel must serve at least one queue");
}

SigmaSolution solve_sigma(const std::function<double(double)>& interarrival_lst, double mean_interarrival,
                          double attended_rate)
{
    if (!(attended_rate > 0.0))
        throw InvalidArgument("attended channel rate must be positive");
    if (!(mean_interarrival * attended_rate > 1.0)) {
        std::ostringstream msg;
        msg << "unstable channel: arrival rate " << 1.0 / mean_interarrival << " >= attended rate " << attended_rate;
        throw UnstableError(msg.str());
    }
    auto map = [&](double sigma) { return interarrival_lst(attended_rate * (1.0 - sigma)); };

    double sigma = 0.5;
    for (int n = 1; n <= iteration_cap; ++n) {
        const double next = map(sigma);
        if (!std::isfinite(next))
            break;
        if (std::abs(next - sigma) < fixed_point_tolerance && next > 0.0 && next < 1.0)
            return {next, n, false};
        sigma = next;
    }

    // g(sigma) = A*(mu_c (1 - sigma)) - sigma is positive at 0 and negative just
    // below 1 when the queue is stable.
    auto g = [&](double s) { return map(s) - s; };
    double lo = 0.0;
    double gap = 1e-3;
    while (g(1.0 - gap) >= 0.0) {
        gap *= 0.5;
        if (gap < 1e-15)
            throw ModelError("could not bracket the channel root below 1");
    }
    double hi = 1.0 - gap;
    int iterations = 0;
    while (hi - lo > fixed_point_tolerance * 1e-2 && iterations < 400) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
        ++iterations;
    }
    const double root = 0.5 * (lo + hi);
    if (!(root > 0.0 && root < 1.0))
        throw ModelError("channel root did not converge inside (0, 1)");
    return {root, iteration_cap + iterations, true};
}

SigmaSolution solve_sigma(const DepartureModel& model, double attended_rate)
{
    return solve_sigma([&](double s) { return departure_laplace(model, s); }, 1.0 / model.arrival_rate,
                       attended_rate);
}

double channel_wait(double sigma, double attended_rate)
{
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw InvalidArgument("sigma must lie in [0, 1)");
    if (!(attended_rate > 0.0))
        throw InvalidArgument("attended channel rate must be positive");
    return sigma / ((1.0 - sigma) * attended_rate);
}

double channel_sojourn(double sigma, double attended_rate)
{
    return channel_wait(sigma, attended_rate) + 1.0 / attended_rate;
}

ChannelResult analyze_channel(const DepartureModel& model, const ChannelSpec& channel)
{
    const double rate = channel.attended_rate();
    const auto solution = solve_sigma(model, rate);
    ChannelResult out;
    out.sigma = solution.sigma;
    out.iterations = solution.iterations;
    out.used_bisection = solution.used_bisection;
    out.wait = channel_wait(solution.sigma, rate);
    out.sojourn = channel_sojourn(solution.sigma, rate);
    return out;
}

} // namespace segq
