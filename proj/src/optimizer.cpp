#include "segq/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "segq/error.hpp"
#include "segq/random.hpp"

namespace segq {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

// Strict "a is a better design than b": lower objective, then smaller tuple.
bool better(double a_objective, const std::vector<int>& a, double b_objective, const std::vector<int>& b)
{
    if (a_objective != b_objective)
        return a_objective < b_objective;
    return a < b;
}

void enumerate(int capacity, std::size_t depth, int lowest, std::vector<int>& current,
               std::vector<std::vector<int>>& out)
{
    if (current.size() == depth) {
        out.push_back(current);
        return;
    }
    for (int level = lowest; level <= capacity - 1; ++level) {
        current.push_back(level);
        enumerate(capacity, depth, level, current, out);
        current.pop_back();
    }
}

} // namespace

PowerSpec::PowerSpec(std::vector<double> frequencies_, double gamma_bar_)
    : frequencies(std::move(frequencies_)), gamma_bar(gamma_bar_)
{
    if (frequencies.empty())
        throw InvalidArgument("power spec needs at least one frequency");
    for (std::size_t k = 0; k < frequencies.size(); ++k) {
        if (!(frequencies[k] > 0.0) || !std::isfinite(frequencies[k]))
            throw InvalidArgument("frequencies must be positive and finite");
        if (k > 0 && frequencies[k] < frequencies[k - 1])
            throw InvalidArgument("frequencies must be non-decreasing across regions");
    }
    if (!(gamma_bar > 0.0) || !std::isfinite(gamma_bar))
        throw InvalidArgument("gamma_bar must be positive and finite");
}

double normalized_power(std::span<const double> dist, const ThresholdPolicy& policy, const PowerSpec& power)
{
    if (power.frequencies.size() != policy.region_count())
        throw InvalidArgument("policy defines " + std::to_string(policy.region_count()) + " regions but " +
                              std::to_string(power.frequencies.size()) + " frequencies were given");
    const auto mass = policy.region_masses(dist);
    const double base = power.gamma_bar * power.frequencies[0];
    double total = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k)
        total += mass[k] * power.gamma_bar * power.frequencies[k];
    return total / base;
}

DesignEvaluation evaluate_design(std::span<const int> thresholds, const DesignContext& context)
{
    if (thresholds.size() != context.threshold_count())
        throw InvalidArgument("expected " + std::to_string(context.threshold_count()) + " thresholds, got " +
                              std::to_string(thresholds.size()));
    DesignEvaluation out;
    out.thresholds.assign(thresholds.begin(), thresholds.end());
    if (!thresholds_valid(thresholds, context.capacity)) {
        out.reason = "thresholds must be strictly increasing within [1, K-1]";
        return out;
    }

    const ThresholdPolicy policy(context.capacity, out.thresholds);
    QueueAnalysis queue;
    try {
        queue = analyze_queue(policy, context.services, context.arrivals, context.delay_variant);
    } catch (const ModelError& e) {
        out.reason = std::string("queue model failed: ") + e.what();
        return out;
    }
    const auto& p = queue.post_departure.probabilities;
    out.w_queue = queue.delay.mean_system_time;
    out.normalized_power =
        normalized_power(context.power_distribution == PowerDistribution::ArbitraryEpoch
                             ? std::span<const double>(queue.arbitrary_epoch.probabilities)
                             : std::span<const double>(p),
                         policy, context.power);

    try {
        const auto departures = build_departure_model(p, queue.delay.carried_load, policy, context.services,
                                                      context.arrivals, context.departure);
        const auto channel = analyze_channel(departures, context.channel);
        out.w_channel = context.channel_delay == ChannelDelay::Sojourn ? channel.sojourn : channel.wait;
    } catch (const ModelError& e) {
        out.reason = e.what();
        return out;
    }
    out.w_system = out.w_queue + out.w_channel;

    const double constrained = context.constraint == ConstraintMode::System ? out.w_system : out.w_queue;
    out.feasible = constrained <= context.delay_bound;
    if (!out.feasible)
        out.reason = "delay bound exceeded";
    return out;
}

std::vector<std::vector<int>> brute_force_candidates(int capacity, std::size_t threshold_count)
{
    std::vector<std::vector<int>> out;
    std::vector<int> current;
    enumerate(capacity, threshold_count, 1, current, out);
    return out;
}

SearchResult brute_force_search(const DesignContext& context, unsigned workers)
{
    const auto candidates = brute_force_candidates(context.capacity, context.threshold_count());
    std::vector<DesignEvaluation> results(candidates.size());

    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(candidates.size(), 1)));
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (candidates.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(candidates.size(), begin + chunk);
            pool.emplace_back([&, begin, end] {
                for (std::size_t i = begin; i < end; ++i)
                    results[i] = evaluate_design(candidates[i], context);
            });
        }
    }

    SearchResult out;
    out.evaluations = results.size();
    for (auto& result : results) {
        if (!result.feasible)
            continue;
        if (!out.best || better(result.objective(), result.thresholds, out.best->objective(), out.best->thresholds))
            out.best = std::move(result);
    }
    return out;
}

void PsoConfig::validate() const
{
    if (swarm_size < 2)
        throw InvalidArgument("pso swarm size must be at least 2");
    if (iterations < 1)
        throw InvalidArgument("pso needs at least one iteration");
    if (!(inertia >= 0.0 && inertia < 1.0))
        throw InvalidArgument("pso inertia must lie in [0, 1)");
    if (!(cognitive > 0.0) || !(social > 0.0))
        throw InvalidArgument("pso cognitive and social weights must be positive");
    if (velocity_clamp && !(*velocity_clamp > 0.0))
        throw InvalidArgument("pso velocity clamp must be positive");
    if (!initial_positions.empty() && initial_positions.size() != static_cast<std::size_t>(swarm_size))
        throw InvalidArgument("pso initial positions must list one position per particle");
}

PsoResult pso_search(const DesignContext& context, const PsoConfig& config)
{
    config.validate();
    const std::size_t dims = context.threshold_count();
    if (dims == 0)
        throw InvalidArgument("pso needs at least one threshold to search");
    const double lower = 1.0;
    const double upper = context.capacity - 1.0;
    const double vmax = config.velocity_clamp.value_or(context.capacity / 4.0);

    RandomStream rng(config.seed, streams::swarm);
    PsoResult out;
    std::map<std::vector<int>, DesignEvaluation> cache;

    struct Particle {
        std::vector<double> position;
        std::vector<double> velocity;
        std::vector<int> best_thresholds;
        double best_objective = infinity;
    };
    std::vector<Particle> swarm(static_cast<std::size_t>(config.swarm_size));
    for (std::size_t n = 0; n < swarm.size(); ++n) {
        auto& particle = swarm[n];
        if (!config.initial_positions.empty()) {
            particle.position = config.initial_positions[n];
            if (particle.position.size() != dims)
                throw InvalidArgument("pso initial position has the wrong dimension");
        } else {
            // Sorted uniform draws are uniform over the ordered simplex.
            particle.position.resize(dims);
            for (auto& x : particle.position)
                x = rng.uniform(lower, upper);
            std::sort(particle.position.begin(), particle.position.end());
        }
        particle.velocity.resize(dims);
        for (auto& v : particle.velocity)
            v = rng.uniform(-vmax, vmax);
    }

    std::vector<int> global_thresholds;
    double global_objective = infinity;

    auto score = [&](const std::vector<double>& position) -> std::pair<double, std::vector<int>> {
        ++out.position_visits;
        std::vector<int> rounded(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            if (position[d] < lower - 0.5 || position[d] >= upper + 0.5)
                return {infinity, {}};
            rounded[d] = static_cast<int>(std::lround(position[d]));
        }
        auto it = cache.find(rounded);
        if (it == cache.end())
            it = cache.emplace(rounded, evaluate_design(rounded, context)).first;
        return {it->second.objective(), rounded};
    };

    auto update_bests = [&](Particle& particle) {
        auto [objective, rounded] = score(particle.position);
        if (objective < particle.best_objective) {
            particle.best_objective = objective;
            particle.best_thresholds = rounded;
        }
        if (objective < infinity && (global_thresholds.empty() ||
                                     better(objective, rounded, global_objective, global_thresholds))) {
            global_objective = objective;
            global_thresholds = rounded;
        }
    };

    auto record = [&](int iteration) {
        out.trace.push_back({iteration, global_objective, global_thresholds, cache.size()});
    };

    for (auto& particle : swarm)
        update_bests(particle);
    record(0);

    for (int iteration = 1; iteration <= config.iterations; ++iteration) {
        for (auto& particle : swarm) {
            for (std::size_t d = 0; d < dims; ++d) {
                const double own = particle.best_thresholds.empty() ? particle.position[d]
                                                                    : particle.best_thresholds[d];
                const double swarm_best = global_thresholds.empty() ? particle.position[d] : global_thresholds[d];
                double v = config.inertia * particle.velocity[d] +
                           config.cognitive * rng.uniform() * (own - particle.position[d]) +
                           config.social * rng.uniform() * (swarm_best - particle.position[d]);
                v = std::clamp(v, -vmax, vmax);
                particle.position[d] += v;
                // Wall touched: reverse the increment direction.
                if (particle.position[d] < lower - 0.5 || particle.position[d] >= upper + 0.5)
                    v = -v;
                particle.velocity[d] = v;
            }
            update_bests(particle);
        }
        record(iteration);
    }

    out.evaluations = cache.size();
    if (!global_thresholds.empty())
        out.best = cache.at(global_thresholds);
    return out;
}

} // namespace segq
