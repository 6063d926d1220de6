#include "segq/service.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "segq/error.hpp"

namespace segq {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

constexpr double quadrature_tolerance = 1e-12;

double integrate_half_line(auto&& f)
{
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15,
                                                quadrature_tolerance, &error);
}

double erlang_density(const Erlang& e, double t)
{
    if (t <= 0.0)
        return e.stages == 1 ? e.rate : 0.0;
    const double x = e.rate * t;
    return e.rate * std::exp((e.stages - 1) * std::log(x) - x - std::lgamma(static_cast<double>(e.stages)));
}

void check_count(int n)
{
    if (n < 0)
        throw InvalidArgument("arrival count must be non-negative");
}

void check_rate(double arrival_rate)
{
    if (!(arrival_rate > 0.0) || !std::isfinite(arrival_rate))
        throw InvalidArgument("arrival rate must be positive and finite");
}

} // namespace

double poisson_pmf(double mean, int n)
{
    if (n < 0)
        return 0.0;
    if (mean == 0.0)
        return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

double poisson_tail(double mean, int n)
{
    if (n <= 0)
        return 1.0;
    if (mean == 0.0)
        return 0.0;
    return boost::math::gamma_p(static_cast<double>(n), mean);
}

ServiceDistribution::ServiceDistribution(Law law) : law_(law)
{
    std::visit(overloaded{
                   [](const Exponential& e) {
                       if (!(e.rate > 0.0) || !std::isfinite(e.rate))
                           throw InvalidArgument("exponential service rate must be positive and finite");
                   },
                   [](const Deterministic& d) {
                       if (!(d.duration > 0.0) || !std::isfinite(d.duration))
                           throw InvalidArgument("deterministic service duration must be positive and finite");
                   },
                   [](const Erlang& e) {
                       if (e.stages < 1 || !(e.rate > 0.0) || !std::isfinite(e.rate))
                           throw InvalidArgument("erlang service needs stages >= 1 and a positive finite rate");
                   },
               },
               law_);
}

std::string ServiceDistribution::kind_name() const
{
    return std::visit(overloaded{
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const Deterministic&) { return std::string("deterministic"); },
                          [](const Erlang&) { return std::string("erlang"); },
                      },
                      law_);
}

double ServiceDistribution::mean() const
{
    return std::visit(overloaded{
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const Deterministic& d) { return d.duration; },
                          [](const Erlang& e) { return e.stages / e.rate; },
                      },
                      law_);
}

double ServiceDistribution::second_moment() const
{
    return std::visit(overloaded{
                          [](const Exponential& e) { return 2.0 / (e.rate * e.rate); },
                          [](const Deterministic& d) { return d.duration * d.duration; },
                          [](const Erlang& e) { return e.stages * (e.stages + 1.0) / (e.rate * e.rate); },
                      },
                      law_);
}

double ServiceDistribution::lst(double s) const
{
    return std::visit(overloaded{
                          [s](const Exponential& e) { return e.rate / (e.rate + s); },
                          [s](const Deterministic& d) { return std::exp(-s * d.duration); },
                          [s](const Erlang& e) { return std::pow(e.rate / (e.rate + s), e.stages); },
                      },
                      law_);
}

double ServiceDistribution::survival(double t) const
{
    if (t < 0.0)
        return 1.0;
    return std::visit(overloaded{
                          [t](const Exponential& e) { return std::exp(-e.rate * t); },
                          [t](const Deterministic& d) { return t < d.duration ? 1.0 : 0.0; },
                          [t](const Erlang& e) { return 1.0 - poisson_tail(e.rate * t, e.stages); },
                      },
                      law_);
}

double ServiceDistribution::arrivals_pmf(double arrival_rate, int n) const
{
    check_rate(arrival_rate);
    check_count(n);
    return std::visit(overloaded{
                          [&](const Exponential& e) {
                              const double total = arrival_rate + e.rate;
                              return (e.rate / total) * std::pow(arrival_rate / total, n);
                          },
                          [&](const Deterministic& d) { return poisson_pmf(arrival_rate * d.duration, n); },
                          [&](const Erlang& e) {
                              return integrate_half_line([&](double t) {
                                  return poisson_pmf(arrival_rate * t, n) * erlang_density(e, t);
                              });
                          },
                      },
                      law_);
}

double ServiceDistribution::arrivals_tail(double arrival_rate, int n) const
{
    check_rate(arrival_rate);
    check_count(n);
    if (n == 0)
        return 1.0;
    return std::visit(overloaded{
                          [&](const Exponential& e) { return std::pow(arrival_rate / (arrival_rate + e.rate), n); },
                          [&](const Deterministic& d) { return poisson_tail(arrival_rate * d.duration, n); },
                          [&](const Erlang&) {
                              double head = 0.0;
                              for (int j = 0; j < n; ++j)
                                  head += arrivals_pmf(arrival_rate, j);
                              return std::max(0.0, 1.0 - head);
                          },
                      },
                      law_);
}

double ServiceDistribution::residual_arrivals_pmf(double arrival_rate, int n) const
{
    check_rate(arrival_rate);
    check_count(n);
    return std::visit(overloaded{
                          // Memoryless: the residual service is again exponential.
                          [&](const Exponential&) { return arrivals_pmf(arrival_rate, n); },
                          // (1/s) * integral_0^s Poisson(n; lambda t) dt = P{N >= n+1} / (lambda s)
                          [&](const Deterministic& d) {
                              const double m = arrival_rate * d.duration;
                              return poisson_tail(m, n + 1) / m;
                          },
                          [&](const Erlang& e) {
                              const double mean_service = e.stages / e.rate;
                              const double integral = integrate_half_line([&](double t) {
                                  return poisson_pmf(arrival_rate * t, n) * survival(t);
                              });
                              return integral / mean_service;
                          },
                      },
                      law_);
}

std::vector<double> ServiceDistribution::arrivals_pmf_table(double arrival_rate, int count) const
{
    std::vector<double> table(static_cast<std::size_t>(std::max(count, 0)));
    for (int n = 0; n < count; ++n)
        table[static_cast<std::size_t>(n)] = arrivals_pmf(arrival_rate, n);
    return table;
}

std::vector<double> ServiceDistribution::residual_arrivals_pmf_table(double arrival_rate, int count) const
{
    std::vector<double> table(static_cast<std::size_t>(std::max(count, 0)));
    for (int n = 0; n < count; ++n)
        table[static_cast<std::size_t>(n)] = residual_arrivals_pmf(arrival_rate, n);
    return table;
}

bool operator==(const Exponential& a, const Exponential& b) { return a.rate == b.rate; }
bool operator==(const Deterministic& a, const Deterministic& b) { return a.duration == b.duration; }
bool operator==(const Erlang& a, const Erlang& b) { return a.stages == b.stages && a.rate == b.rate; }

bool operator==(const ServiceDistribution& a, const ServiceDistribution& b) { return a.law_ == b.law_; }

} // namespace segq
