#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "segq/error.hpp"
#include "segq/policy.hpp"
#include "segq/queue_core.hpp"
#include "segq/service.hpp"

using namespace segq;

TEST_CASE("region_of covers every length and follows the thresholds")
{
    const ThresholdPolicy policy(50, {15, 30});
    CHECK(policy.region_count() == 3);
    CHECK(policy.region_of(0) == 0);
    CHECK(policy.region_of(1) == 0);
    CHECK(policy.region_of(15) == 0);
    CHECK(policy.region_of(16) == 1);
    CHECK(policy.region_of(30) == 1);
    CHECK(policy.region_of(31) == 2);
    CHECK(policy.region_of(50) == 2);
    CHECK_THROWS_AS(policy.region_of(51), InvalidArgument);
    CHECK(policy.region_range(1) == std::pair{16, 30});
    CHECK(policy.staircase_start(2) == 30);
}

TEST_CASE("region masses partition the distribution")
{
    const ThresholdPolicy policy(5, {1, 3});
    const std::vector<double> dist{0.1, 0.2, 0.3, 0.1, 0.2, 0.1};
    const auto mass = policy.region_masses(dist);
    CHECK(mass[0] == doctest::Approx(0.3));
    CHECK(mass[1] == doctest::Approx(0.4));
    CHECK(mass[2] == doctest::Approx(0.3));
}

TEST_CASE("threshold ordering and bounds are enforced")
{
    CHECK_THROWS_AS(ThresholdPolicy(10, {5, 3}), InvalidArgument);
    CHECK_THROWS_AS(ThresholdPolicy(10, {3, 3}), InvalidArgument);
    CHECK_THROWS_AS(ThresholdPolicy(10, {0}), InvalidArgument);
    CHECK_THROWS_AS(ThresholdPolicy(10, {10}), InvalidArgument);
    CHECK_THROWS_AS(ThresholdPolicy(0, {}), InvalidArgument);
    CHECK_NOTHROW(ThresholdPolicy(10, {1, 9}));
    CHECK_THROWS_AS(ArrivalSpec(0.0), InvalidArgument);
    CHECK_THROWS_AS(ArrivalSpec(-1.0), InvalidArgument);
}

TEST_CASE("service transforms are normalized and their slope is the mean")
{
    const ServiceSpec laws{ServiceDistribution::exponential(3.0), ServiceDistribution::deterministic(0.4),
                           ServiceDistribution::erlang(3, 5.0)};
    for (const auto& law : laws) {
        CHECK(law.lst(0.0) == doctest::Approx(1.0).epsilon(1e-15));
        const double h = 1e-6;
        const double slope = -(law.lst(h) - law.lst(0.0)) / h;
        CHECK(slope == doctest::Approx(law.mean()).epsilon(1e-5));
    }
    CHECK(laws[2].mean() == doctest::Approx(0.6));
    CHECK(laws[2].second_moment() == doctest::Approx(3.0 * 4.0 / 25.0));
}

TEST_CASE("arrival counts during a service")
{
    const ArrivalSpec unit(1.0);
    const ServiceSpec exp1{ServiceDistribution::exponential(1.0)};
    CHECK(arrivals_during_service(exp1, 0, 0, unit) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tail_probability(exp1, 0, 1, unit) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tail_probability(exp1, 0, 0, unit) == 1.0);
    CHECK(residual_arrival_probability(exp1, 0, 0, unit) == doctest::Approx(0.5).epsilon(1e-15));

    const ServiceSpec det_half{ServiceDistribution::deterministic(0.5)};
    CHECK(arrivals_during_service(det_half, 0, 0, ArrivalSpec(2.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    const ServiceSpec det1{ServiceDistribution::deterministic(1.0)};
    const double direct = 1.0 - std::exp(-1.0) * (1.0 + 1.0 + 0.5);
    CHECK(std::abs(tail_probability(det1, 0, 3, unit) - direct) < 1e-14);
    CHECK(std::abs(tail_probability(det1, 0, 3, unit) - 0.080301) < 1e-6);

    // Exponential mu = 3, lambda = 2, n = 5 against quadrature.
    const ServiceSpec exp3{ServiceDistribution::exponential(3.0)};
    const double quad = oracle::integrate_to_infinity(
        [](double t) { return t > 1e3 ? 0.0 : std::pow(2.0 * t, 5) / 120.0 * 3.0 * std::exp(-5.0 * t); });
    CHECK(std::abs(arrivals_during_service(exp3, 0, 5, ArrivalSpec(2.0)) - quad) < 1e-10);

    // Deterministic residual, s = 1, lambda = 2, n = 1: (1/s) integral_0^s Poisson(2t; 1) dt.
    const double residual = oracle::integrate([](double t) { return 2.0 * t * std::exp(-2.0 * t); }, 0.0, 1.0);
    CHECK(std::abs(residual_arrival_probability(det1, 0, 1, ArrivalSpec(2.0)) - residual) < 1e-10);
}

TEST_CASE("arrival and residual probabilities sum to one")
{
    const ArrivalSpec arrivals(150.0);
    const ServiceSpec laws{ServiceDistribution::exponential(200.0), ServiceDistribution::deterministic(1.0 / 300.0),
                           ServiceDistribution::erlang(4, 800.0)};
    for (std::size_t k = 0; k < laws.size(); ++k) {
        double a = 0.0;
        double c = 0.0;
        for (int n = 0; n < 400; ++n) {
            a += arrivals_during_service(laws, k, n, arrivals);
            c += residual_arrival_probability(laws, k, n, arrivals);
        }
        CHECK(std::abs(a - 1.0) < 1e-10);
        CHECK(std::abs(c - 1.0) < 1e-10);
    }
}

TEST_CASE("the quadrature path reproduces the Erlang closed form")
{
    const auto erlang = ServiceDistribution::erlang(3, 400.0);
    CHECK_FALSE(erlang.has_closed_form());
    for (int n = 0; n < 30; ++n)
        CHECK(std::abs(erlang.arrivals_pmf(150.0, n) - oracle::erlang_arrivals(3, 400.0, 150.0, n)) < 1e-12);
    // One stage is exponential; residual of exponential equals the service itself.
    const auto one = ServiceDistribution::erlang(1, 300.0);
    const auto exp = ServiceDistribution::exponential(300.0);
    for (int n = 0; n < 20; ++n) {
        CHECK(std::abs(one.arrivals_pmf(150.0, n) - exp.arrivals_pmf(150.0, n)) < 1e-12);
        CHECK(std::abs(one.residual_arrivals_pmf(150.0, n) - exp.arrivals_pmf(150.0, n)) < 1e-12);
    }
}

TEST_CASE("poisson helpers")
{
    CHECK(poisson_pmf(0.0, 0) == 1.0);
    CHECK(poisson_pmf(0.0, 3) == 0.0);
    CHECK(poisson_tail(2.5, 0) == 1.0);
    CHECK(std::abs(poisson_pmf(700.0, 700) - 0.015076) < 1e-5);
    CHECK(std::abs(poisson_tail(3.0, 2) - (1.0 - std::exp(-3.0) * 4.0)) < 1e-15);
}
