#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "segq/departure.hpp"
#include "segq/error.hpp"
#include "segq/queue_core.hpp"
#include "segq/simulator.hpp"

using namespace segq;

namespace {

struct Scenario {
    ThresholdPolicy policy;
    ServiceSpec services;
    ArrivalSpec arrivals;
};

Scenario exponential_scenario()
{
    return {ThresholdPolicy(50, {15, 30}),
            {ServiceDistribution::exponential(200.0), ServiceDistribution::exponential(300.0),
             ServiceDistribution::exponential(400.0)},
            ArrivalSpec(150.0)};
}

Scenario deterministic_scenario()
{
    return {ThresholdPolicy(50, {3, 8}),
            {ServiceDistribution::deterministic(1.0 / 200.0), ServiceDistribution::deterministic(1.0 / 300.0),
             ServiceDistribution::deterministic(1.0 / 400.0)},
            ArrivalSpec(150.0)};
}

DepartureModel model_of(const Scenario& s, const DepartureOptions& options = {})
{
    const auto r = analyze_queue(s.policy, s.services, s.arrivals);
    return build_departure_model(r.post_departure.probabilities, r.delay.carried_load, s.policy, s.services,
                                 s.arrivals, options);
}

double atom_sum(const DepartureModel& m)
{
    double total = 0.0;
    for (const auto& a : m.atoms)
        total += a.weight;
    return total;
}

} // namespace

TEST_CASE("effective mean service")
{
    const ThresholdPolicy policy(5, {1, 3});
    const ServiceSpec services{ServiceDistribution::deterministic(1.0 / 200.0),
                               ServiceDistribution::deterministic(1.0 / 300.0),
                               ServiceDistribution::deterministic(1.0 / 400.0)};
    const std::vector<double> thirds{1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    CHECK(effective_mean_service(thirds, policy, services) ==
          doctest::Approx((1.0 / 200 + 1.0 / 300 + 1.0 / 400) / 3.0).epsilon(1e-14));
    CHECK(std::abs(effective_mean_service(thirds, policy, services) - 0.0036111) < 1e-7);

    const std::vector<double> low{0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
    CHECK(effective_mean_service(low, policy, services) == doctest::Approx(1.0 / 200.0));
}

TEST_CASE("inter-departure components")
{
    const auto c = interdeparture_components(0.5, 2.0, 0.25);
    CHECK(c.nonempty_mean == 0.25);
    CHECK(c.empty_mean == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(c.total == doctest::Approx(0.5).epsilon(1e-15));

    for (double p0 : {1e-6, 0.01, 0.25, 0.5, 0.9, 0.999999})
        for (double lambda : {1.0, 50.0, 150.0, 1e4})
            for (double te : {1e-5, 0.001, 0.0049})
                CHECK(std::abs(interdeparture_components(p0, lambda, te).total * lambda - 1.0) < 1e-13);

    CHECK_THROWS_AS(interdeparture_components(0.0, 1.0, 0.1), ModelError);
    CHECK_THROWS_AS(interdeparture_components(1.0, 1.0, 0.1), ModelError);
}

TEST_CASE("atom weights")
{
    const ThresholdPolicy policy(5, {2});
    const ServiceSpec services{ServiceDistribution::exponential(4.0), ServiceDistribution::exponential(8.0)};
    const std::vector<double> low{0.4, 0.3, 0.3, 0.0, 0.0, 0.0};
    const auto atoms = atom_weights(low, policy, services, 0.4);
    CHECK(atoms[0].weight == doctest::Approx(1.0));
    CHECK(atoms[0].time == doctest::Approx(0.25));
    CHECK(atoms[1].weight == 0.0);
    CHECK_THROWS_AS(atom_weights(std::vector<double>{1, 0, 0, 0, 0, 0}, policy, services, 1.0), ModelError);

    for (const auto& s : {exponential_scenario(), deterministic_scenario()}) {
        const auto m = model_of(s);
        CHECK(std::abs(atom_sum(m) - 1.0) < 1e-12);
        CHECK(std::abs(m.nonempty_mass() * atom_sum(m) - (1.0 - m.p0)) < 1e-12);
        for (const auto& a : m.atoms)
            CHECK(a.weight >= 0.0);
    }
}

TEST_CASE("empty-arrival component matches its mass and moment")
{
    for (const auto& s : {exponential_scenario(), deterministic_scenario()}) {
        const auto m = model_of(s);
        const auto& e = m.empty;
        CHECK(e.alpha == m.arrival_rate);
        const double mu = 1.0 / m.effective_service;
        CHECK(e.beta == doctest::Approx(2.0 * m.arrival_rate * mu / (m.arrival_rate + mu)));
        CHECK(e.t0 == doctest::Approx(s.services[0].mean()));
        CHECK(e.t1 == 0.011);
        CHECK(0.0 < e.t0);
        CHECK(e.t0 < e.t1);

        const auto parts = interdeparture_components(m.p0, m.arrival_rate, m.effective_service);
        CHECK(std::abs(e.mass() - m.p0) < 1e-10);
        CHECK(std::abs(e.first_moment() - m.p0 * parts.empty_mean) < 1e-10);

        // Independent quadrature of the density.
        auto density = [&](double t) { return e.density(t); };
        const double mass = oracle::integrate(density, e.t0, e.t1) + oracle::integrate_to_infinity(density, e.t1);
        const double moment = oracle::integrate([&](double t) { return t * e.density(t); }, e.t0, e.t1) +
                              oracle::integrate_to_infinity([&](double t) { return t * e.density(t); }, e.t1);
        CHECK(std::abs(mass - m.p0) < 1e-10);
        CHECK(std::abs(moment - m.p0 * parts.empty_mean) < 1e-10);
        CHECK(e.density(0.5 * e.t0) == 0.0);
        CHECK(m.empty_cdf(0.0) == 0.0);
        CHECK(std::abs(m.empty_cdf(1.0) - 1.0) < 1e-10);
    }
}

TEST_CASE("singular moment system and flagged amplitudes")
{
    CHECK_THROWS_AS(empty_component_params(150.0, 200.0, 0.3, 0.004, 0.011, 0.005), InvalidArgument);
    // Target conditional mean 1.9 lies beyond the tail mean t1 + 1/alpha = 1.2.
    const auto e = empty_component_params(1.0, 1.0, 0.5, 0.1, 0.05, 0.2);
    CHECK(e.b < 0.0);
    CHECK(e.negative_amplitude);
    DepartureModel m;
    m.p0 = 0.5;
    m.empty = e;
    CHECK_FALSE(m.warnings().empty());
}

TEST_CASE("transform: total mass, slope and quadrature")
{
    for (const auto& s : {exponential_scenario(), deterministic_scenario()}) {
        const auto m = model_of(s);
        CHECK(std::abs(departure_laplace(m, 0.0) - 1.0) < 1e-9);
        const double h = 1e-6;
        const double slope = -(departure_laplace(m, h) - departure_laplace(m, 0.0)) / h;
        CHECK(std::abs(slope - m.mean()) / m.mean() < 1e-4);

        const double s100 = 100.0;
        double expected = 0.0;
        for (const auto& a : m.atoms)
            expected += m.nonempty_mass() * a.weight * std::exp(-s100 * a.time);
        auto f = [&](double t) { return std::exp(-s100 * t) * m.empty.density(t); };
        expected += oracle::integrate(f, m.empty.t0, m.empty.t1) + oracle::integrate_to_infinity(f, m.empty.t1);
        CHECK(std::abs(departure_laplace(m, s100) - expected) < 1e-8);

        // Decreasing and convex on [0, 10 lambda].
        const double top = 10.0 * m.arrival_rate;
        double prev = departure_laplace(m, 0.0);
        double prev_step = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 200; ++k) {
            const double v = departure_laplace(m, top * k / 200.0);
            CHECK(v < prev);
            const double step = v - prev;
            CHECK(step >= prev_step - 1e-15);
            prev_step = step;
            prev = v;
        }
    }
}

TEST_CASE("model mean equals 1/lambda when the atoms carry mean t_E")
{
    // One region: every service has mean E[S_1], so the atom mean is t_E.
    for (double lambda : {20.0, 100.0, 180.0}) {
        const Scenario s{ThresholdPolicy(40, {}), {ServiceDistribution::exponential(200.0)}, ArrivalSpec(lambda)};
        const auto m = model_of(s);
        CHECK(std::abs(m.mean() * lambda - 1.0) < 1e-9);
        const double h = 1e-6;
        const double slope = -(departure_laplace(m, h) - 1.0) / h;
        CHECK(std::abs(slope * lambda - 1.0) < 1e-4);
    }
    // Light traffic: almost every packet finds the queue empty.
    const auto s = exponential_scenario();
    const Scenario light{s.policy, s.services, ArrivalSpec(0.5)};
    const auto m = model_of(light);
    CHECK(m.p0 > 0.99);
    CHECK(std::abs(m.mean() * 0.5 - 1.0) < 1e-9);
}

TEST_CASE("model mean offset from 1/lambda is p0 (t_E - E[S_1])")
{
    for (const auto& s : {exponential_scenario(), deterministic_scenario()}) {
        const auto m = model_of(s);
        const double offset = m.p0 * (m.effective_service - s.services[0].mean());
        CHECK(std::abs(m.mean() - (1.0 / m.arrival_rate + offset)) < 1e-12);
    }
}

TEST_CASE("options: idle source, t0, t1 and effective rate")
{
    const auto s = exponential_scenario();
    const auto r = analyze_queue(s.policy, s.services, s.arrivals);
    DepartureOptions options;
    options.idle_source = IdleProbabilitySource::ArbitraryEpoch;
    options.t0 = 0.004;
    options.t1 = 0.02;
    options.effective_rate = 250.0;
    const auto m = build_departure_model(r.post_departure.probabilities, r.delay.carried_load, s.policy, s.services,
                                         s.arrivals, options);
    CHECK(m.p0 == doctest::Approx(1.0 - r.delay.carried_load));
    CHECK(m.empty.t0 == 0.004);
    CHECK(m.empty.t1 == 0.02);
    CHECK(m.empty.beta == doctest::Approx(2.0 * 150.0 * 250.0 / 400.0));
    CHECK(std::abs(m.empty.mass() - m.p0) < 1e-10);
}

TEST_CASE("record round trip")
{
    const auto m = model_of(deterministic_scenario());
    const auto back = departure_model_from_json(nlohmann::json::parse(to_json(m).dump()));
    CHECK(back.p0 == m.p0);
    CHECK(back.effective_service == m.effective_service);
    CHECK(back.empty.b == m.empty.b);
    CHECK(back.empty.c == m.empty.c);
    REQUIRE(back.atoms.size() == m.atoms.size());
    for (std::size_t k = 0; k < m.atoms.size(); ++k) {
        CHECK(back.atoms[k].time == m.atoms[k].time);
        CHECK(back.atoms[k].weight == m.atoms[k].weight);
    }
    for (double x : {0.0, 10.0, 1000.0})
        CHECK(departure_laplace(back, x) == departure_laplace(m, x));
    CHECK_THROWS_AS(departure_model_from_json(nlohmann::json{{"p0", 0.5}}), InvalidArgument);
}

TEST_CASE("inter-departure law against simulation")
{
    SUBCASE("conditional means")
    {
        for (const auto& s : {exponential_scenario(), deterministic_scenario()}) {
            const auto m = model_of(s);
            const auto parts = interdeparture_components(m.p0, m.arrival_rate, m.effective_service);
            SimConfig sim{s.arrivals, s.policy, s.services};
            sim.horizon = 400'000;
            sim.seed = 5;
            const auto st = simulate_queue(sim);
            CHECK(std::abs(st.mean_interdeparture_nonempty - parts.nonempty_mean) / parts.nonempty_mean < 0.02);
            CHECK(std::abs(st.mean_interdeparture_empty - parts.empty_mean) / parts.empty_mean < 0.02);
            CHECK(std::abs(st.mean_service_time - m.effective_service) / m.effective_service < 0.01);
        }
    }
    SUBCASE("atoms and empty-arrival law with deterministic services")
    {
        const auto s = deterministic_scenario();
        const auto m = model_of(s);
        SimConfig sim{s.arrivals, s.policy, s.services};
        sim.horizon = 400'000;
        sim.seed = 9;
        sim.record_intervals = true;
        const auto st = simulate_queue(sim);
        const auto emp = empirical_interdeparture(st.intervals, 1e-4, AtomDetection::Cluster);
        REQUIRE(emp.nonempty_atomic);
        for (const auto& atom : m.atoms) {
            double observed = 0.0;
            for (const auto& e : emp.nonempty)
                if (std::abs(e.value - atom.time) < 1e-9)
                    observed = e.mass / emp.nonempty_fraction;
            CHECK(std::abs(observed - atom.weight) < 0.02);
        }
        std::vector<double> empty;
        for (const auto& t : st.intervals)
            if (t.empty_arrival)
                empty.push_back(t.duration);
        CHECK(ks_distance(empty, [&](double t) { return m.empty_cdf(t); }) <= 0.1);
    }
}
