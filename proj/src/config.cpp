#include "segq/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <string_view>

namespace segq {

namespace {

using nlohmann::json;

constexpr double default_packets_per_cycle = 2e-6;
constexpr double base_frequency = 1e8;

[[noreturn]] void fail(const std::string& path, const std::string& message)
{
    throw ConfigError(path + ": " + message);
}

void check_object(const json& node, const std::string& path, std::initializer_list<std::string_view> allowed)
{
    if (!node.is_object())
        fail(path, "expected an object");
    const std::set<std::string_view> keys(allowed);
    for (const auto& [key, value] : node.items())
        if (!keys.contains(key))
            fail(path.empty() ? key : path + "." + key, "unknown key");
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& node, const std::string& path)
{
    if (!node.is_number())
        fail(path, "expected a number");
    return node.get<double>();
}

double positive(const json& node, const std::string& path)
{
    const double value = number(node, path);
    if (!(value > 0.0) || !std::isfinite(value))
        fail(path, "must be positive and finite");
    return value;
}

std::int64_t integer(const json& node, const std::string& path)
{
    if (!node.is_number_integer())
        fail(path, "expected an integer");
    return node.get<std::int64_t>();
}

std::uint64_t count(const json& node, const std::string& path)
{
    const auto value = integer(node, path);
    if (value < 0)
        fail(path, "must be non-negative");
    return static_cast<std::uint64_t>(value);
}

template <class Enum>
Enum choice(const json& node, const std::string& path, std::initializer_list<std::pair<std::string_view, Enum>> options)
{
    if (!node.is_string())
        fail(path, "expected a string");
    const auto text = node.get<std::string>();
    std::string names;
    for (const auto& [name, value] : options) {
        if (text == name)
            return value;
        names += names.empty() ? std::string(name) : ", " + std::string(name);
    }
    fail(path, "unknown value \"" + text + "\" (expected one of: " + names + ")");
}

template <class Enum>
std::string name_of(Enum value, std::initializer_list<std::pair<std::string_view, Enum>> options)
{
    for (const auto& [name, candidate] : options)
        if (candidate == value)
            return std::string(name);
    return "";
}

const std::initializer_list<std::pair<std::string_view, DelayVariant>> delay_variants{
    {"lst_consistent", DelayVariant::LstConsistent}, {"ahead_only", DelayVariant::AheadOnly}};
const std::initializer_list<std::pair<std::string_view, EpochMode>> epoch_modes{
    {"renormalized", EpochMode::Renormalized}, {"unnormalized", EpochMode::Unnormalized}};
const std::initializer_list<std::pair<std::string_view, PowerDistribution>> power_distributions{
    {"arbitrary_epoch", PowerDistribution::ArbitraryEpoch}, {"post_departure", PowerDistribution::PostDeparture}};
const std::initializer_list<std::pair<std::string_view, ChannelDelay>> channel_delays{
    {"sojourn", ChannelDelay::Sojourn}, {"queue_wait", ChannelDelay::QueueWait}};
const std::initializer_list<std::pair<std::string_view, ConstraintMode>> constraint_modes{
    {"system", ConstraintMode::System}, {"queue_only", ConstraintMode::QueueOnly}};
const std::initializer_list<std::pair<std::string_view, IdleProbabilitySource>> idle_sources{
    {"post_departure", IdleProbabilitySource::PostDeparture}, {"arbitrary_epoch", IdleProbabilitySource::ArbitraryEpoch}};
const std::initializer_list<std::pair<std::string_view, SlotMode>> slot_modes{
    {"exponential", SlotMode::Exponential}, {"deterministic", SlotMode::Deterministic}};
const std::initializer_list<std::pair<std::string_view, NetworkFeed>> feeds{
    {"segmented_queue", NetworkFeed::SegmentedQueue}, {"poisson", NetworkFeed::Poisson}};

ServiceDistribution parse_service(const json& node, const std::string& path)
{
    if (!node.is_object() || !node.contains("kind"))
        fail(path, "expected an object with a \"kind\"");
    const auto kind = node.at("kind");
    if (!kind.is_string())
        fail(join(path, "kind"), "expected a string");
    const auto name = kind.get<std::string>();
    if (name == "exponential") {
        check_object(node, path, {"kind", "rate"});
        if (!node.contains("rate"))
            fail(join(path, "rate"), "required for exponential service");
        return ServiceDistribution::exponential(positive(node.at("rate"), join(path, "rate")));
    }
    if (name == "deterministic") {
        check_object(node, path, {"kind", "duration", "rate"});
        if (node.contains("duration") == node.contains("rate"))
            fail(path, "deterministic service needs exactly one of \"duration\" or \"rate\"");
        const double duration = node.contains("duration") ? positive(node.at("duration"), join(path, "duration"))
                                                           : 1.0 / positive(node.at("rate"), join(path, "rate"));
        return ServiceDistribution::deterministic(duration);
    }
    if (name == "erlang") {
        check_object(node, path, {"kind", "stages", "rate"});
        if (!node.contains("stages") || !node.contains("rate"))
            fail(path, "erlang service needs \"stages\" and \"rate\"");
        const auto stages = integer(node.at("stages"), join(path, "stages"));
        if (stages < 1)
            fail(join(path, "stages"), "must be at least 1");
        return ServiceDistribution::erlang(static_cast<int>(stages), positive(node.at("rate"), join(path, "rate")));
    }
    fail(join(path, "kind"), "unknown service kind \"" + name + "\" (expected exponential, deterministic or erlang)");
}

} // namespace

DesignContext Config::design_context() const
{
    DesignContext context{arrivals, policy.capacity(), services, channel, power};
    context.delay_bound = delay_bound;
    context.constraint = constraint;
    context.delay_variant = analysis.delay_variant;
    context.power_distribution = analysis.power_distribution;
    context.channel_delay = analysis.channel_delay;
    context.departure = departure;
    return context;
}

SimConfig Config::sim_config(bool with_network) const
{
    SimConfig sim{arrivals, policy, services};
    sim.horizon = simulation.horizon;
    sim.warmup = simulation.warmup;
    sim.seed = simulation.seed;
    if (with_network) {
        NetworkConfig net;
        net.queues = channel.queues;
        net.channel_rate = channel.rate;
        net.slot_mode = simulation.slot_mode;
        net.feed = simulation.feed;
        sim.network = net;
    }
    return sim;
}

Config parse_config(const json& doc)
{
    check_object(doc, "", {"arrival_rate", "capacity", "thresholds", "services", "service_model", "power", "channel",
                           "delay_bound", "constraint", "analysis", "departure", "pso", "simulation", "output_dir"});
    for (const char* key : {"arrival_rate", "capacity", "thresholds"})
        if (!doc.contains(key))
            fail(key, "required");

    const double rate = positive(doc.at("arrival_rate"), "arrival_rate");
    const auto capacity = integer(doc.at("capacity"), "capacity");
    if (capacity < 1)
        fail("capacity", "must be a positive integer");

    const auto& thresholds_node = doc.at("thresholds");
    if (!thresholds_node.is_array())
        fail("thresholds", "expected an array of integers");
    std::vector<int> thresholds;
    for (std::size_t k = 0; k < thresholds_node.size(); ++k)
        thresholds.push_back(static_cast<int>(integer(thresholds_node[k], "thresholds[" + std::to_string(k) + "]")));
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        if (thresholds[k] < 1)
            fail("thresholds", "L_1 must be at least 1");
        if (k > 0 && thresholds[k] <= thresholds[k - 1])
            fail("thresholds", "must be strictly increasing (L_1 < L_2 < ...), got " + std::to_string(thresholds[k - 1]) +
                                   " before " + std::to_string(thresholds[k]));
        if (thresholds[k] >= capacity)
            fail("thresholds", "every threshold must be below the capacity K = " + std::to_string(capacity));
    }
    const std::size_t regions = thresholds.size() + 1;

    std::optional<std::vector<double>> frequencies;
    double gamma_bar = 1.0;
    if (doc.contains("power")) {
        const auto& node = doc.at("power");
        check_object(node, "power", {"frequencies", "gamma_bar"});
        if (node.contains("frequencies")) {
            const auto& list = node.at("frequencies");
            if (!list.is_array())
                fail("power.frequencies", "expected an array");
            std::vector<double> values;
            for (std::size_t k = 0; k < list.size(); ++k)
                values.push_back(positive(list[k], "power.frequencies[" + std::to_string(k) + "]"));
            if (values.size() != regions)
                fail("power.frequencies", std::to_string(thresholds.size()) + " thresholds define " +
                                              std::to_string(regions) + " regions, so " + std::to_string(regions) +
                                              " frequencies are needed, got " + std::to_string(values.size()));
            frequencies = values;
        }
        if (node.contains("gamma_bar"))
            gamma_bar = positive(node.at("gamma_bar"), "power.gamma_bar");
    }

    ServiceSpec services;
    if (doc.contains("services")) {
        if (doc.contains("service_model"))
            fail("service_model", "give either \"services\" or \"service_model\", not both");
        const auto& list = doc.at("services");
        if (!list.is_array())
            fail("services", "expected an array");
        for (std::size_t k = 0; k < list.size(); ++k)
            services.push_back(parse_service(list[k], "services[" + std::to_string(k) + "]"));
        if (services.size() != regions)
            fail("services", std::to_string(thresholds.size()) + " thresholds define " + std::to_string(regions) +
                                 " regions, so " + std::to_string(regions) + " service specs are needed, got " +
                                 std::to_string(services.size()));
    } else {
        std::string kind = "exponential";
        double packets_per_cycle = default_packets_per_cycle;
        if (doc.contains("service_model")) {
            const auto& node = doc.at("service_model");
            check_object(node, "service_model", {"kind", "packets_per_cycle"});
            if (node.contains("kind")) {
                kind = choice<std::string>(node.at("kind"), "service_model.kind",
                                           {{"exponential", "exponential"}, {"deterministic", "deterministic"}});
            }
            if (node.contains("packets_per_cycle"))
                packets_per_cycle = positive(node.at("packets_per_cycle"), "service_model.packets_per_cycle");
        }
        if (!frequencies) {
            if (regions != 3)
                fail("power.frequencies", "required when services are derived and there are not exactly 3 regions");
            frequencies = std::vector<double>{1e8, 1.5e8, 2e8};
        }
        for (double f : *frequencies) {
            const double mu = f * packets_per_cycle;
            services.push_back(kind == "exponential" ? ServiceDistribution::exponential(mu)
                                                     : ServiceDistribution::deterministic(1.0 / mu));
        }
    }
    if (!frequencies) {
        std::vector<double> values;
        for (const auto& service : services)
            values.push_back(base_frequency * services[0].mean() / service.mean());
        frequencies = values;
    }

    double channel_rate = 600.0;
    std::int64_t channel_queues = 3;
    if (doc.contains("channel")) {
        const auto& node = doc.at("channel");
        check_object(node, "channel", {"rate", "queues"});
        if (node.contains("rate"))
            channel_rate = positive(node.at("rate"), "channel.rate");
        if (node.contains("queues")) {
            channel_queues = integer(node.at("queues"), "channel.queues");
            if (channel_queues < 1)
                fail("channel.queues", "must be at least 1");
        }
    }

    auto build = [&]() -> Config {
        try {
            PowerSpec power(*frequencies, gamma_bar);
            return Config{ArrivalSpec(rate),
                          ThresholdPolicy(static_cast<int>(capacity), thresholds),
                          services,
                          power,
                          ChannelSpec(channel_rate, static_cast<int>(channel_queues)),
                          std::numeric_limits<double>::infinity()};
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidArgument& e) {
            fail("config", e.what());
        }
    };
    Config config = build();

    if (doc.contains("delay_bound") && !doc.at("delay_bound").is_null()) {
        const double bound = number(doc.at("delay_bound"), "delay_bound");
        if (bound < 0.0)
            fail("delay_bound", "must be non-negative");
        config.delay_bound = bound;
    }
    if (doc.contains("constraint"))
        config.constraint = choice(doc.at("constraint"), "constraint", constraint_modes);

    if (doc.contains("analysis")) {
        const auto& node = doc.at("analysis");
        check_object(node, "analysis", {"delay_variant", "epoch_mode", "power_distribution", "channel_delay"});
        if (node.contains("delay_variant"))
            config.analysis.delay_variant = choice(node.at("delay_variant"), "analysis.delay_variant", delay_variants);
        if (node.contains("epoch_mode"))
            config.analysis.epoch_mode = choice(node.at("epoch_mode"), "analysis.epoch_mode", epoch_modes);
        if (node.contains("power_distribution"))
            config.analysis.power_distribution =
                choice(node.at("power_distribution"), "analysis.power_distribution", power_distributions);
        if (node.contains("channel_delay"))
            config.analysis.channel_delay = choice(node.at("channel_delay"), "analysis.channel_delay", channel_delays);
    }

    if (doc.contains("departure")) {
        const auto& node = doc.at("departure");
        check_object(node, "departure", {"t0", "t1", "effective_rate", "idle_source"});
        if (node.contains("t1"))
            config.departure.t1 = positive(node.at("t1"), "departure.t1");
        if (node.contains("t0") && !node.at("t0").is_null())
            config.departure.t0 = positive(node.at("t0"), "departure.t0");
        if (node.contains("effective_rate") && !node.at("effective_rate").is_null())
            config.departure.effective_rate = positive(node.at("effective_rate"), "departure.effective_rate");
        if (node.contains("idle_source"))
            config.departure.idle_source = choice(node.at("idle_source"), "departure.idle_source", idle_sources);
        const double t0 = config.departure.t0.value_or(config.services[0].mean());
        if (!(t0 < config.departure.t1))
            fail("departure", "t0 (" + std::to_string(t0) + ") must be below t1 (" +
                                  std::to_string(config.departure.t1) + ")");
    }

    if (doc.contains("pso")) {
        const auto& node = doc.at("pso");
        check_object(node, "pso", {"swarm_size", "iterations", "inertia", "cognitive", "social", "velocity_clamp", "seed"});
        auto& pso = config.pso;
        if (node.contains("swarm_size"))
            pso.swarm_size = static_cast<int>(integer(node.at("swarm_size"), "pso.swarm_size"));
        if (node.contains("iterations"))
            pso.iterations = static_cast<int>(integer(node.at("iterations"), "pso.iterations"));
        if (node.contains("inertia"))
            pso.inertia = number(node.at("inertia"), "pso.inertia");
        if (node.contains("cognitive"))
            pso.cognitive = number(node.at("cognitive"), "pso.cognitive");
        if (node.contains("social"))
            pso.social = number(node.at("social"), "pso.social");
        if (node.contains("velocity_clamp") && !node.at("velocity_clamp").is_null())
            pso.velocity_clamp = number(node.at("velocity_clamp"), "pso.velocity_clamp");
        if (node.contains("seed"))
            pso.seed = count(node.at("seed"), "pso.seed");
        try {
            pso.validate();
        } catch (const InvalidArgument& e) {
            fail("pso", e.what());
        }
    }

    if (doc.contains("simulation")) {
        const auto& node = doc.at("simulation");
        check_object(node, "simulation", {"horizon", "warmup", "seed", "slot_mode", "feed"});
        auto& sim = config.simulation;
        if (node.contains("horizon"))
            sim.horizon = count(node.at("horizon"), "simulation.horizon");
        if (node.contains("warmup") && !node.at("warmup").is_null())
            sim.warmup = count(node.at("warmup"), "simulation.warmup");
        if (node.contains("seed"))
            sim.seed = count(node.at("seed"), "simulation.seed");
        if (node.contains("slot_mode"))
            sim.slot_mode = choice(node.at("slot_mode"), "simulation.slot_mode", slot_modes);
        if (node.contains("feed"))
            sim.feed = choice(node.at("feed"), "simulation.feed", feeds);
        try {
            config.sim_config().validate();
        } catch (const InvalidArgument& e) {
            fail("simulation", e.what());
        }
    }

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string())
            fail("output_dir", "expected a string");
        config.output_dir = doc.at("output_dir").get<std::string>();
    }
    return config;
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path.string() + ": cannot open config file");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ServiceDistribution& service)
{
    const auto& law = service.law();
    if (const auto* e = std::get_if<Exponential>(&law))
        return {{"kind", "exponential"}, {"rate", e->rate}};
    if (const auto* d = std::get_if<Deterministic>(&law))
        return {{"kind", "deterministic"}, {"duration", d->duration}};
    const auto& erlang = std::get<Erlang>(law);
    return {{"kind", "erlang"}, {"stages", erlang.stages}, {"rate", erlang.rate}};
}

json to_json(const Config& config)
{
    json services = json::array();
    for (const auto& service : config.services)
        services.push_back(to_json(service));
    json doc = {
        {"arrival_rate", config.arrivals.rate},
        {"capacity", config.policy.capacity()},
        {"thresholds", config.policy.thresholds()},
        {"services", services},
        {"power", {{"frequencies", config.power.frequencies}, {"gamma_bar", config.power.gamma_bar}}},
        {"channel", {{"rate", config.channel.rate}, {"queues", config.channel.queues}}},
        {"delay_bound", std::isfinite(config.delay_bound) ? json(config.delay_bound) : json(nullptr)},
        {"constraint", name_of(config.constraint, constraint_modes)},
        {"analysis",
         {{"delay_variant", name_of(config.analysis.delay_variant, delay_variants)},
          {"epoch_mode", name_of(config.analysis.epoch_mode, epoch_modes)},
          {"power_distribution", name_of(config.analysis.power_distribution, power_distributions)},
          {"channel_delay", name_of(config.analysis.channel_delay, channel_delays)}}},
        {"departure",
         {{"t1", config.departure.t1},
          {"t0", config.departure.t0 ? json(*config.departure.t0) : json(nullptr)},
          {"effective_rate", config.departure.effective_rate ? json(*config.departure.effective_rate) : json(nullptr)},
          {"idle_source", name_of(config.departure.idle_source, idle_sources)}}},
        {"pso",
         {{"swarm_size", config.pso.swarm_size},
          {"iterations", config.pso.iterations},
          {"inertia", config.pso.inertia},
          {"cognitive", config.pso.cognitive},
          {"social", config.pso.social},
          {"velocity_clamp", config.pso.velocity_clamp ? json(*config.pso.velocity_clamp) : json(nullptr)},
          {"seed", config.pso.seed}}},
        {"simulation",
         {{"horizon", config.simulation.horizon},
          {"warmup", config.simulation.warmup ? json(*config.simulation.warmup) : json(nullptr)},
          {"seed", config.simulation.seed},
          {"slot_mode", name_of(config.simulation.slot_mode, slot_modes)},
          {"feed", name_of(config.simulation.feed, feeds)}}},
        {"output_dir", config.output_dir},
    };
    return doc;
}

} // namespace segq
