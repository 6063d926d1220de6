#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segq/policy.hpp"
#include "segq/queue_core.hpp"
#include "segq/service.hpp"

namespace segq {

// Mean inter-departure time split by whether the departing packet arrived to a
// non-empty (A) or an empty (B) system.
struct InterdepartureComponents {
    double nonempty_mean; // A
    double empty_mean;    // B
    double total;         // (1 - p0) A + p0 B
};

struct DepartureAtom {
    double time;   // s
    double weight; // conditional on a non-empty arrival; weights sum to 1
};

// f_E(t) = B exp(-beta t) on [t0, t1) plus C exp(-alpha t) on [t1, inf).
struct EmptyComponent {
    double alpha = 0.0; // 1/s
    double beta = 0.0;  // 1/s
    double t0 = 0.0;    // s
    double t1 = 0.0;    // s
    double b = 0.0;     // amplitude of the first piece, 1/s
    double c = 0.0;     // amplitude of the tail piece, 1/s
    bool negative_amplitude = false;

    double density(double t) const;
    // integral_0^t f_E
    double mass_until(double t) const;
    double mass() const;
    double first_moment() const;
    // integral exp(-st) f_E(t) dt
    double laplace(double s) const;
};

struct DepartureModel {
    double arrival_rate = 0.0;
    double p0 = 0.0;
    double effective_service = 0.0; // t_E
    std::vector<DepartureAtom> atoms;
    EmptyComponent empty;

    double nonempty_mass() const { return 1.0 - p0; }
    double atom_mean() const;
    // Mean of the full law: (1 - p0) * atom mean + integral t f_E.
    double mean() const;
    // Conditional CDF of the empty-arrival part, F_E(t) / p0.
    double empty_cdf(double t) const;
    // Model warnings (currently only a negative fitted amplitude).
    std::vector<std::string> warnings() const;
};

enum class IdleProbabilitySource {
    PostDeparture, // p_0 of the embedded chain
    ArbitraryEpoch // 1 - rho', the time-average idle fraction seen by Poisson arrivals
};

struct DepartureOptions {
    double t1 = 0.011;                   // s; fitted constant for the tail breakpoint
    std::optional<double> t0;            // s; defaults to E[S_1]
    std::optional<double> effective_rate; // 1/s, used in beta; defaults to 1 / t_E
    IdleProbabilitySource idle_source = IdleProbabilitySource::PostDeparture;
};

double effective_mean_service(std::span<const double> p, const ThresholdPolicy& policy, const ServiceSpec& services);

InterdepartureComponents interdeparture_components(double p0, double arrival_rate, double effective_service);

std::vector<DepartureAtom> atom_weights(std::span<const double> p, const ThresholdPolicy& policy,
                                        const ServiceSpec& services, double p0);

EmptyComponent empty_component_params(double arrival_rate, double effective_rate, double p0,
                                      double effective_service, double t0, double t1);

DepartureModel build_departure_model(std::span<const double> p, double carried_load, const ThresholdPolicy& policy,
                                     const ServiceSpec& services, const ArrivalSpec& arrivals,
                                     const DepartureOptions& options = {});

double departure_laplace(const DepartureModel& model, double s);

nlohmann::json to_json(const DepartureModel& model);
DepartureModel departure_model_from_json(const nlohmann::json& record);

} // namespace segq
