#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "segq/channel.hpp"
#include "segq/departure.hpp"
#include "segq/error.hpp"
#include "segq/optimizer.hpp"
#include "segq/policy.hpp"
#include "segq/queue_core.hpp"
#include "segq/service.hpp"
#include "segq/simulator.hpp"

namespace segq {

// Schema violation; the message starts with the offending field path.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

struct AnalysisOptions {
    DelayVariant delay_variant = DelayVariant::LstConsistent;
    EpochMode epoch_mode = EpochMode::Renormalized;
    PowerDistribution power_distribution = PowerDistribution::ArbitraryEpoch;
    ChannelDelay channel_delay = ChannelDelay::Sojourn;
};

struct SimulationSettings {
    std::uint64_t horizon = 1'000'000;
    std::optional<std::uint64_t> warmup;
    std::uint64_t seed = 1;
    SlotMode slot_mode = SlotMode::Exponential;
    NetworkFeed feed = NetworkFeed::SegmentedQueue;
};

// One scenario. Defaults when keys are omitted:
//   services       derived from power.frequencies * service_model.packets_per_cycle
//                  (2e-6 packets per cycle, exponential), i.e. 200/300/400 pkt/s
//                  for the 100/150/200 MHz triple
//   power          frequencies 1e8 * E[S_1] / E[S_k]; gamma_bar 1
//   channel        rate 600 pkt/s shared by 3 queues
//   delay_bound    unbounded; constraint "system"
//   departure      t1 = 0.011 s, t0 = E[S_1], effective rate 1 / t_E, idle source post-departure
//   pso            20 particles, 100 iterations, w 0.7, c1 = c2 = 1.5, clamp K/4, seed 1
//   simulation     10^6 departures, warm-up 10 %, seed 1, exponential slots, segmented-queue feed
//   output_dir     "results"
struct Config {
    ArrivalSpec arrivals;
    ThresholdPolicy policy;
    ServiceSpec services;
    PowerSpec power;
    ChannelSpec channel;
    double delay_bound;
    ConstraintMode constraint = ConstraintMode::System;
    AnalysisOptions analysis;
    DepartureOptions departure;
    PsoConfig pso;
    SimulationSettings simulation;
    std::string output_dir = "results";

    DesignContext design_context() const;
    SimConfig sim_config(bool with_network = true) const;
};

Config parse_config(const nlohmann::json& document);
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& config);

nlohmann::json to_json(const ServiceDistribution& service);

} // namespace segq
