#include <doctest.h>

#include <cmath>
#include <limits>

#include "segq/error.hpp"
#include "segq/optimizer.hpp"

using namespace segq;

namespace {

DesignContext default_context(double bound = std::numeric_limits<double>::infinity(), int capacity = 50)
{
    DesignContext ctx{ArrivalSpec(150.0),
                      capacity,
                      {ServiceDistribution::exponential(200.0), ServiceDistribution::exponential(300.0),
                       ServiceDistribution::exponential(400.0)},
                      ChannelSpec(600.0, 3),
                      PowerSpec({1e8, 1.5e8, 2e8})};
    ctx.delay_bound = bound;
    return ctx;
}

} // namespace

TEST_CASE("normalized power")
{
    const ThresholdPolicy policy(5, {1, 3});
    const PowerSpec power({1e8, 1.5e8, 2e8});
    const std::vector<double> low{0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
    CHECK(normalized_power(low, policy, power) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> thirds{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    CHECK(normalized_power(thirds, policy, power) == doctest::Approx(1.5).epsilon(1e-15));
    const PowerSpec doubled({1e8, 1.5e8, 2e8}, 2.0);
    CHECK(std::abs(normalized_power(thirds, policy, doubled) - normalized_power(thirds, policy, power)) < 1e-15);
    CHECK_THROWS_AS(normalized_power(thirds, policy, PowerSpec({1e8, 2e8})), InvalidArgument);
    CHECK_THROWS_AS(PowerSpec({2e8, 1e8}), InvalidArgument);
    CHECK_THROWS_AS(PowerSpec({1e8}, 0.0), InvalidArgument);
}

TEST_CASE("design evaluation")
{
    const auto ctx = default_context();
    const std::vector<int> bad{30, 15};
    const auto invalid = evaluate_design(bad, ctx);
    CHECK_FALSE(invalid.feasible);
    CHECK(invalid.objective() == std::numeric_limits<double>::infinity());
    CHECK_FALSE(invalid.reason.empty());

    for (int a = 1; a < 49; a += 7) {
        for (int b = a + 1; b < 50; b += 5) {
            const std::vector<int> t{a, b};
            const auto e = evaluate_design(t, ctx);
            CHECK(e.feasible);
            CHECK(e.w_system == e.w_queue + e.w_channel);
            CHECK(e.normalized_power >= 1.0);
            CHECK(e.normalized_power <= 2.0);
        }
    }

    auto unstable = default_context();
    unstable.channel = ChannelSpec(300.0, 3);
    const std::vector<int> t{15, 30};
    const auto e = evaluate_design(t, unstable);
    CHECK_FALSE(e.feasible);
    CHECK(e.reason.find("unstable") != std::string::npos);

    auto queue_only = default_context(0.02);
    queue_only.constraint = ConstraintMode::QueueOnly;
    CHECK(evaluate_design(t, queue_only).feasible);
    CHECK_FALSE(evaluate_design(t, default_context(0.02)).feasible);
}

TEST_CASE("feasible set grows with the bound")
{
    std::vector<std::vector<int>> previous;
    for (double bound : {0.028, 0.030, 0.032, 0.034, 0.05}) {
        const auto ctx = default_context(bound, 20);
        std::vector<std::vector<int>> feasible;
        for (const auto& t : brute_force_candidates(20, 2))
            if (evaluate_design(t, ctx).feasible)
                feasible.push_back(t);
        for (const auto& t : previous)
            CHECK(std::find(feasible.begin(), feasible.end(), t) != feasible.end());
        CHECK(feasible.size() >= previous.size());
        previous = feasible;
    }
}

TEST_CASE("brute force")
{
    CHECK(brute_force_candidates(50, 2).size() == 1225);
    CHECK(brute_force_candidates(5, 2).size() == 10);
    CHECK(brute_force_candidates(6, 1).size() == 5);

    const auto ctx = default_context(0.0283);
    const auto result = brute_force_search(ctx, 4);
    CHECK(result.evaluations == 1225);
    REQUIRE(result.best);

    // Second enumeration, sequential and independent of the search's reduction.
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> arg;
    for (int a = 1; a < 50; ++a)
        for (int b = a + 1; b < 50; ++b) {
            const std::vector<int> t{a, b};
            const auto e = evaluate_design(t, ctx);
            if (e.feasible && e.normalized_power < best) {
                best = e.normalized_power;
                arg = t;
            }
        }
    CHECK(result.best->normalized_power == best);
    CHECK(result.best->thresholds == arg);
    CHECK(result.best->thresholds == std::vector<int>{2, 49});

    const auto single = brute_force_search(ctx, 1);
    CHECK(single.best->thresholds == result.best->thresholds);

    const auto none = brute_force_search(default_context(0.0));
    CHECK_FALSE(none.best);
    CHECK(none.evaluations == 1225);
}

TEST_CASE("pso")
{
    const auto ctx = default_context(0.0283);
    PsoConfig cfg;
    cfg.seed = 3;
    const auto a = pso_search(ctx, cfg);
    const auto b = pso_search(ctx, cfg);
    REQUIRE(a.best);
    CHECK(a.best->thresholds == b.best->thresholds);
    CHECK(a.evaluations == b.evaluations);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].best_thresholds == b.trace[i].best_thresholds);
        CHECK(a.trace[i].evaluations == b.trace[i].evaluations);
    }
    CHECK(a.trace.size() == static_cast<std::size_t>(cfg.iterations) + 1);
    CHECK(a.evaluations <= static_cast<std::size_t>(cfg.swarm_size * (cfg.iterations + 1)));
    CHECK(a.evaluations < 1225);
    for (std::size_t i = 1; i < a.trace.size(); ++i)
        CHECK(a.trace[i].best_objective <= a.trace[i - 1].best_objective);

    const auto brute = brute_force_search(ctx);
    CHECK(a.best->normalized_power >= brute.best->normalized_power - 1e-12);

    PsoConfig pinned;
    pinned.initial_positions.assign(static_cast<std::size_t>(pinned.swarm_size), {2.0, 49.0});
    const auto fixed = pso_search(ctx, pinned);
    REQUIRE(fixed.best);
    CHECK(fixed.best->thresholds == std::vector<int>{2, 49});

    const auto none = pso_search(default_context(0.0), cfg);
    CHECK_FALSE(none.best);
}

TEST_CASE("pso configuration checks")
{
    PsoConfig cfg;
    cfg.swarm_size = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.inertia = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.social = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.velocity_clamp = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
