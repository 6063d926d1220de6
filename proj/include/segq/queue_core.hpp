#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "segq/policy.hpp"
#include "segq/service.hpp"

namespace segq {

// One-step transition matrix of the post-departure chain on {0, ..., K}.
class TransitionMatrix {
public:
    explicit TransitionMatrix(Eigen::MatrixXd values);

    const Eigen::MatrixXd& values() const { return values_; }
    std::size_t states() const { return static_cast<std::size_t>(values_.rows()); }
    double operator()(std::size_t i, std::size_t j) const
    {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    // Largest |row sum - 1|.
    double stochasticity_error() const;

private:
    Eigen::MatrixXd values_;
};

struct PostDepartureDist {
    std::vector<double> probabilities;
    double residual = 0.0; // sup-norm of pP - p at solve time

    double operator[](std::size_t i) const { return probabilities[i]; }
    std::size_t size() const { return probabilities.size(); }
    // sup-norm of pP - p
    double fixed_point_residual(const TransitionMatrix& matrix) const;
};

enum class EpochMode { Unnormalized, Renormalized };

struct ArbitraryEpochDist {
    // Entry j is the number of packets waiting in the buffer (the packet in
    // service is not counted), which is what the residual-service convolution
    // produces.
    std::vector<double> probabilities;
    EpochMode mode = EpochMode::Renormalized;

    double operator[](std::size_t i) const { return probabilities[i]; }
    std::size_t size() const { return probabilities.size(); }
};

// How the first region charges the arriving packet's own service in E[W].
enum class DelayVariant {
    AheadOnly,     // p_i * i * E[S_1]: packets ahead only
    LstConsistent, // p_i * (i + 1) * E[S_1], the derivative of W*(s)
};

struct DelaySummary {
    double mean_departure_interval = 0.0; // T_mean, s
    double carried_load = 0.0;            // rho'
    double mean_system_time = 0.0;        // selected variant, s
    double mean_system_time_ahead_only = 0.0;
    double mean_system_time_lst_consistent = 0.0;
};

double arrivals_during_service(const ServiceSpec& services, std::size_t region, int n, const ArrivalSpec& arrivals);
double tail_probability(const ServiceSpec& services, std::size_t region, int n, const ArrivalSpec& arrivals);
double residual_arrival_probability(const ServiceSpec& services, std::size_t region, int n,
                                    const ArrivalSpec& arrivals);

TransitionMatrix build_embedded_matrix(const ThresholdPolicy& policy, const ServiceSpec& services,
                                       const ArrivalSpec& arrivals);

// Direct solve of p P = p, sum(p) = 1, by elimination in GTH order (O(K^2) for
// this skip-free chain). Throws ModelError when the chain is reducible or the
// result is not a fixed point to 1e-10.
PostDepartureDist solve_stationary(const TransitionMatrix& matrix);

double mean_departure_interval(std::span<const double> p, const ServiceSpec& services, const ArrivalSpec& arrivals,
                               const ThresholdPolicy& policy);
double carried_load(std::span<const double> p, const ServiceSpec& services, const ThresholdPolicy& policy,
                    double mean_interval);
double mean_system_time(std::span<const double> p, const ThresholdPolicy& policy, const ServiceSpec& services,
                        DelayVariant variant);
// Product-form LST of the system time; W*(0) = 1.
double system_time_lst(std::span<const double> p, const ThresholdPolicy& policy, const ServiceSpec& services,
                       double s);

ArbitraryEpochDist arbitrary_epoch_distribution(std::span<const double> p, double carried_load,
                                                const ThresholdPolicy& policy, const ServiceSpec& services,
                                                const ArrivalSpec& arrivals, EpochMode mode);

// Full pipeline for one policy.
struct QueueAnalysis {
    PostDepartureDist post_departure;
    ArbitraryEpochDist arbitrary_epoch;
    DelaySummary delay;
};

QueueAnalysis analyze_queue(const ThresholdPolicy& policy, const ServiceSpec& services, const ArrivalSpec& arrivals,
                            DelayVariant variant = DelayVariant::LstConsistent,
                            EpochMode mode = EpochMode::Renormalized);

void check_region_count(const ThresholdPolicy& policy, const ServiceSpec& services);

} // namespace segq
