#include <doctest.h>

#include <cmath>

#include "segq/error.hpp"
#include "segq/simulator.hpp"

using namespace segq;

namespace {

SimConfig mm1(double lambda, double mu, std::uint64_t horizon, std::uint64_t seed)
{
    SimConfig cfg{ArrivalSpec(lambda), ThresholdPolicy(200, {}), {ServiceDistribution::exponential(mu)}};
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

SimConfig three_region(std::uint64_t horizon, std::uint64_t seed)
{
    SimConfig cfg{ArrivalSpec(150.0), ThresholdPolicy(50, {15, 30}),
                  {ServiceDistribution::exponential(200.0), ServiceDistribution::exponential(300.0),
                   ServiceDistribution::exponential(400.0)}};
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("M/M/1 sojourn")
{
    const auto stats = simulate_queue(mm1(150.0, 200.0, 1'000'000, 1));
    CHECK(stats.sojourn.contains(1.0 / 50.0));
    CHECK(stats.sojourn.half_width < 0.001);
}

TEST_CASE("M/M/1 confidence intervals cover the true mean")
{
    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        covered += simulate_queue(mm1(150.0, 200.0, 1'000'000, seed)).sojourn.contains(1.0 / 50.0);
    CHECK(covered >= 45);
}

TEST_CASE("bookkeeping identities")
{
    const auto cfg = three_region(300'000, 4);
    const auto s = simulate_queue(cfg);
    CHECK(s.arrivals == s.departures_total + s.drops + s.in_system_at_end);
    CHECK(s.departures_total == cfg.horizon);
    CHECK(s.departures == cfg.horizon - cfg.warmup_departures());
    CHECK(s.empty_departures + s.nonempty_departures == s.departures);
    std::uint64_t by_region = 0;
    for (auto c : s.region_service_counts)
        by_region += c;
    CHECK(by_region == s.departures);
    double h = 0.0;
    for (double x : s.system_histogram)
        h += x;
    CHECK(std::abs(h - 1.0) < 1e-12);
    double b = 0.0;
    for (double x : s.buffer_histogram)
        b += x;
    CHECK(std::abs(b - 1.0) < 1e-12);
    CHECK(std::abs(s.time_average_in_system - s.throughput * s.sojourn.mean) / s.time_average_in_system < 0.01);
    CHECK(s.blocking_fraction < 1e-6);
}

TEST_CASE("same seed, same statistics; different seed, different run")
{
    auto cfg = three_region(200'000, 21);
    cfg.record_intervals = true;
    const auto a = simulate_queue(cfg);
    const auto b = simulate_queue(cfg);
    CHECK(a.sojourn.mean == b.sojourn.mean);
    CHECK(a.sojourn.half_width == b.sojourn.half_width);
    CHECK(a.system_histogram == b.system_histogram);
    CHECK(a.arrivals == b.arrivals);
    REQUIRE(a.intervals.size() == b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i)
        CHECK(a.intervals[i].duration == b.intervals[i].duration);
    cfg.seed = 22;
    CHECK(simulate_queue(cfg).sojourn.mean != a.sojourn.mean);
}

TEST_CASE("mean inter-departure time without loss")
{
    for (double lambda : {50.0, 100.0, 150.0}) {
        auto cfg = three_region(400'000, 2);
        cfg.arrivals = ArrivalSpec(lambda);
        const auto s = simulate_queue(cfg);
        CHECK(s.blocking_fraction < 1e-6);
        CHECK(std::abs(s.mean_interdeparture * lambda - 1.0) < 0.01);
    }
}

TEST_CASE("services follow the region of the length at initiation")
{
    SimConfig cfg{ArrivalSpec(150.0), ThresholdPolicy(50, {3, 8}),
                  {ServiceDistribution::deterministic(1.0 / 200.0), ServiceDistribution::deterministic(1.0 / 300.0),
                   ServiceDistribution::deterministic(1.0 / 400.0)}};
    cfg.horizon = 100'000;
    cfg.record_intervals = true;
    const auto s = simulate_queue(cfg);
    const double means[3] = {1.0 / 200.0, 1.0 / 300.0, 1.0 / 400.0};
    for (const auto& t : s.intervals) {
        if (!t.empty_arrival)
            CHECK(std::abs(t.duration - means[t.region]) < 1e-9);
        else
            CHECK(t.region == 0);
    }
}

TEST_CASE("empirical inter-departure split")
{
    std::vector<TaggedInterval> all_busy{{0.005, false, 0}, {0.005, false, 0}, {0.0025, false, 2}};
    auto e = empirical_interdeparture(all_busy, 1e-3);
    CHECK(e.empty_fraction == 0.0);
    CHECK(e.empty.empty());
    CHECK(e.nonempty_atomic);
    REQUIRE(e.nonempty.size() == 2);
    CHECK(e.nonempty[0].value == doctest::Approx(0.0025));
    CHECK(e.nonempty[1].mass == doctest::Approx(2.0 / 3.0));

    auto cfg = three_region(100'000, 8);
    cfg.record_intervals = true;
    const auto s = simulate_queue(cfg);
    const auto split = empirical_interdeparture(s.intervals, 5e-4);
    CHECK_FALSE(split.nonempty_atomic);
    double total = 0.0;
    for (const auto& m : split.empty)
        total += m.mass;
    for (const auto& m : split.nonempty)
        total += m.mass;
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(split.empty_fraction + split.nonempty_fraction - 1.0) < 1e-12);

    CHECK_THROWS_AS(empirical_interdeparture({}, 1e-3), InvalidArgument);
    CHECK_THROWS_AS(empirical_interdeparture(all_busy, 0.0), InvalidArgument);
}

TEST_CASE("KS distance and batch means")
{
    CHECK(ks_distance({0.5}, [](double t) { return t; }) == doctest::Approx(0.5));
    std::vector<double> uniform;
    for (int i = 0; i < 1000; ++i)
        uniform.push_back((i + 0.5) / 1000.0);
    CHECK(ks_distance(uniform, [](double t) { return t; }) == doctest::Approx(0.0005));
    const std::vector<double> constant(100, 2.0);
    const auto ci = batch_means(constant);
    CHECK(ci.mean == 2.0);
    CHECK(ci.half_width == 0.0);
    CHECK_THROWS_AS(batch_means(std::vector<double>(5, 1.0)), InvalidArgument);
}

TEST_CASE("configuration checks")
{
    auto cfg = mm1(1.0, 2.0, 100, 1);
    cfg.warmup = 100;
    CHECK_THROWS_AS(simulate_queue(cfg), InvalidArgument);
    cfg.warmup = 0;
    CHECK_NOTHROW(simulate_queue(cfg));
    SimConfig mismatch{ArrivalSpec(1.0), ThresholdPolicy(10, {5}), {ServiceDistribution::exponential(2.0)}};
    CHECK_THROWS_AS(simulate_queue(mismatch), InvalidArgument);
    auto net = mm1(1.0, 2.0, 1000, 1);
    CHECK_THROWS_AS(simulate_network(net), InvalidArgument);
}

TEST_CASE("one queue with exponential slots and Poisson feed is M/M/1")
{
    auto cfg = mm1(150.0, 200.0, 1'000'000, 3);
    cfg.network = NetworkConfig{1, 200.0, SlotMode::Exponential, NetworkFeed::Poisson};
    const auto net = simulate_network(cfg);
    const double wait = 150.0 / (200.0 * 50.0);
    CHECK(net.wait.contains(wait));
    CHECK(std::abs(net.wait.mean - wait) / wait < 0.03);
}

TEST_CASE("cyclic polling gives each of three queues a third of the slots")
{
    for (auto mode : {SlotMode::Exponential, SlotMode::Deterministic}) {
        auto cfg = three_region(300'000, 6);
        cfg.network = NetworkConfig{3, 600.0, mode, NetworkFeed::SegmentedQueue};
        const auto net = simulate_network(cfg);
        REQUIRE(net.visit_rates.size() == 3);
        for (std::size_t q = 0; q < 3; ++q) {
            CHECK(std::abs(net.visit_rates[q] - 200.0) / 200.0 < 0.01);
            CHECK(std::abs(net.transmit_rates[q] - 150.0) / 150.0 < 0.01);
        }
    }
}
