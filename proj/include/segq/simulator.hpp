#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "segq/policy.hpp"
#include "segq/service.hpp"

namespace segq {

enum class SlotMode { Exponential, Deterministic };

// What feeds the channel buffers in a network run.
enum class NetworkFeed { SegmentedQueue, Poisson };

struct NetworkConfig {
    int queues = 3;
    double channel_rate = 600.0; // slots per second; slot mean 1 / channel_rate
    SlotMode slot_mode = SlotMode::Exponential;
    NetworkFeed feed = NetworkFeed::SegmentedQueue;
};

// The buffer holds at most K waiting packets next to the one in service, so
// post-departure lengths stay in {0, ..., K}.
struct SimConfig {
    ArrivalSpec arrivals;
    ThresholdPolicy policy;
    ServiceSpec services;
    std::uint64_t horizon = 1'000'000;  // departures per queue
    std::optional<std::uint64_t> warmup; // departures discarded; defaults to horizon / 10
    std::uint64_t seed = 1;
    bool record_intervals = false;
    bool record_sojourns = false;
    std::optional<NetworkConfig> network;

    std::uint64_t warmup_departures() const { return warmup.value_or(horizon / 10); }
    void validate() const;
};

struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0; // 95 %, batch means

    bool contains(double value) const { return value >= mean - half_width && value <= mean + half_width; }
};

struct TaggedInterval {
    double duration;    // time since the previous departure, s
    bool empty_arrival; // the departing packet found the system empty
    int region;         // service region used for the departing packet
};

struct QueueSimStats {
    // Whole-run counters; arrivals == departures_total + drops + in_system_at_end.
    std::uint64_t arrivals = 0;
    std::uint64_t departures_total = 0;
    std::uint64_t drops = 0;
    std::uint64_t in_system_at_end = 0;

    // Measurement window (after warm-up).
    std::uint64_t departures = 0;
    std::uint64_t window_arrivals = 0;
    std::uint64_t window_drops = 0;
    double observed_time = 0.0;
    ConfidenceInterval sojourn;
    double mean_interdeparture = 0.0;
    double mean_interdeparture_empty = 0.0;
    double mean_interdeparture_nonempty = 0.0;
    std::uint64_t empty_departures = 0;
    std::uint64_t nonempty_departures = 0;
    double busy_fraction = 0.0;
    double mean_service_time = 0.0;
    double time_average_in_system = 0.0;
    double throughput = 0.0;
    double blocking_fraction = 0.0;
    std::vector<double> system_histogram; // time-average, lengths 0..K+1
    std::vector<double> buffer_histogram; // time-average waiting count, 0..K
    std::vector<std::uint64_t> region_service_counts;
    std::vector<std::uint64_t> nonempty_region_counts;

    std::vector<TaggedInterval> intervals; // when record_intervals
    std::vector<double> sojourns;          // when record_sojourns

    // Monte Carlo E[exp(-s W)]; needs record_sojourns.
    double sojourn_laplace(double s) const;
};

QueueSimStats simulate_queue(const SimConfig& config);

struct NetworkSimStats {
    int queues = 0;
    std::uint64_t packets = 0;
    double observed_time = 0.0;
    ConfidenceInterval wait;    // arrival at the channel buffer to transmission start
    ConfidenceInterval sojourn; // arrival at the channel buffer to end of transmission
    std::vector<double> visit_rates;    // slots per second given to each queue
    std::vector<double> transmit_rates; // packets per second sent by each queue
};

NetworkSimStats simulate_network(const SimConfig& config);

enum class AtomDetection {
    Auto,    // cluster, fall back to bins when values do not collapse into a few atoms
    Cluster, // exact-value clustering (deterministic services)
    Bins
};

struct EmpiricalMass {
    double value; // atom location or bin centre
    double mass;  // fraction of all samples
};

struct EmpiricalDeparture {
    std::vector<EmpiricalMass> empty;    // binned; masses sum to empty_fraction
    std::vector<EmpiricalMass> nonempty; // atoms or bins; masses sum to nonempty_fraction
    bool nonempty_atomic = false;
    double empty_fraction = 0.0;
    double nonempty_fraction = 0.0;
};

EmpiricalDeparture empirical_interdeparture(std::span<const TaggedInterval> samples, double bin_width,
                                            AtomDetection detection = AtomDetection::Auto);

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

// 95 % batch-means interval over a sequence (20 batches).
ConfidenceInterval batch_means(std::span<const double> values, int batches = 20);

} // namespace segq
