#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segq/channel.hpp"
#include "segq/departure.hpp"
#include "segq/policy.hpp"
#include "segq/queue_core.hpp"
#include "segq/service.hpp"

namespace segq {

// Per-region clock frequencies. Power in region k is gamma_bar * f_k.
struct PowerSpec {
    explicit PowerSpec(std::vector<double> frequencies, double gamma_bar = 1.0);

    std::vector<double> frequencies; // Hz, non-decreasing
    double gamma_bar;                // W/Hz
};

// Sum over regions of (region mass) * f_k / f_1. gamma_bar cancels.
double normalized_power(std::span<const double> dist, const ThresholdPolicy& policy, const PowerSpec& power);

enum class ConstraintMode { System, QueueOnly };

enum class PowerDistribution { ArbitraryEpoch, PostDeparture };

// Which channel quantity enters W_system.
enum class ChannelDelay {
    Sojourn,  // waiting plus the attended service time 1 / mu_c
    QueueWait // sigma / ((1 - sigma) mu_c) only
};

struct DesignContext {
    ArrivalSpec arrivals;
    int capacity;
    ServiceSpec services;
    ChannelSpec channel;
    PowerSpec power;
    double delay_bound = std::numeric_limits<double>::infinity();
    ConstraintMode constraint = ConstraintMode::System;
    DelayVariant delay_variant = DelayVariant::LstConsistent;
    PowerDistribution power_distribution = PowerDistribution::ArbitraryEpoch;
    ChannelDelay channel_delay = ChannelDelay::Sojourn;
    DepartureOptions departure;

    std::size_t threshold_count() const { return services.size() - 1; }
};

struct DesignEvaluation {
    std::vector<int> thresholds;
    double normalized_power = std::numeric_limits<double>::infinity();
    double w_queue = std::numeric_limits<double>::infinity();
    double w_channel = std::numeric_limits<double>::infinity();
    double w_system = std::numeric_limits<double>::infinity();
    bool feasible = false;
    std::string reason; // why the design is infeasible; empty when feasible

    // Value minimized by the searches; +inf when infeasible.
    double objective() const
    {
        return feasible ? normalized_power : std::numeric_limits<double>::infinity();
    }
};

DesignEvaluation evaluate_design(std::span<const int> thresholds, const DesignContext& context);

struct SearchResult {
    std::optional<DesignEvaluation> best; // empty: no feasible design
    std::size_t evaluations = 0;
};

// Enumerates every non-decreasing threshold tuple in [1, K-1]; for two
// thresholds that is K(K-1)/2 candidates. Candidates with repeated values are
// evaluated and rejected by evaluate_design. Ties on NP go to the
// lexicographically smaller tuple. workers = 0 picks the hardware concurrency.
SearchResult brute_force_search(const DesignContext& context, unsigned workers = 0);

// Candidate tuples in the order brute_force_search visits them.
std::vector<std::vector<int>> brute_force_candidates(int capacity, std::size_t threshold_count);

struct PsoConfig {
    int swarm_size = 20;
    int iterations = 100;
    double inertia = 0.7;
    double cognitive = 1.5;
    double social = 1.5;
    std::optional<double> velocity_clamp; // defaults to K / 4
    std::uint64_t seed = 1;
    // Optional explicit starting positions, one per particle.
    std::vector<std::vector<double>> initial_positions;

    void validate() const;
};

struct PsoTraceRow {
    int iteration;
    double best_objective;
    std::vector<int> best_thresholds; // empty until a feasible design is seen
    std::size_t evaluations;
};

struct PsoResult {
    std::optional<DesignEvaluation> best;
    std::size_t evaluations = 0;     // distinct designs passed to evaluate_design
    std::size_t position_visits = 0; // particle-iterations, including cached and out-of-bounds ones
    std::vector<PsoTraceRow> trace;
};

PsoResult pso_search(const DesignContext& context, const PsoConfig& config);

} // namespace segq
