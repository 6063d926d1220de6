#pragma once

#include <string>
#include <variant>
#include <vector>

namespace segq {

struct Exponential {
    double rate; // 1/s
};

struct Deterministic {
    double duration; // s
};

// Erlang(stages, rate): sum of `stages` exponentials. No closed forms are used
// for it; its arrival probabilities go through adaptive quadrature so that any
// further distribution can be added the same way.
struct Erlang {
    int stages;
    double rate; // per stage, 1/s
};

// Service-time law of one region.
class ServiceDistribution {
public:
    using Law = std::variant<Exponential, Deterministic, Erlang>;

    explicit ServiceDistribution(Law law);

    static ServiceDistribution exponential(double rate) { return ServiceDistribution(Exponential{rate}); }
    static ServiceDistribution deterministic(double duration) { return ServiceDistribution(Deterministic{duration}); }
    static ServiceDistribution erlang(int stages, double rate) { return ServiceDistribution(Erlang{stages, rate}); }

    const Law& law() const { return law_; }
    std::string kind_name() const;
    bool is_deterministic() const { return std::holds_alternative<Deterministic>(law_); }
    // False when the arrival probabilities come from numerical quadrature.
    bool has_closed_form() const { return !std::holds_alternative<Erlang>(law_); }

    double mean() const;
    double second_moment() const;
    // Laplace-Stieltjes transform E[exp(-sS)], s >= 0.
    double lst(double s) const;
    // P{S > t}
    double survival(double t) const;

    // a_n: probability of n Poisson(rate) arrivals during one service.
    double arrivals_pmf(double arrival_rate, int n) const;
    // sum_{j >= n} a_j
    double arrivals_tail(double arrival_rate, int n) const;
    // c_n: probability of n arrivals during the residual (stationary-excess)
    // service time.
    double residual_arrivals_pmf(double arrival_rate, int n) const;

    // Tables for n = 0..count-1.
    std::vector<double> arrivals_pmf_table(double arrival_rate, int count) const;
    std::vector<double> residual_arrivals_pmf_table(double arrival_rate, int count) const;

    friend bool operator==(const ServiceDistribution& a, const ServiceDistribution& b);

private:
    Law law_;
};

bool operator==(const Exponential& a, const Exponential& b);
bool operator==(const Deterministic& a, const Deterministic& b);
bool operator==(const Erlang& a, const Erlang& b);

// Per-region service laws, region 0 first.
using ServiceSpec = std::vector<ServiceDistribution>;

// Poisson(mean) probability mass at n, evaluated in log space.
double poisson_pmf(double mean, int n);
// P{Poisson(mean) >= n}
double poisson_tail(double mean, int n);

} // namespace segq
