#include "segq/departure.hpp"

#include <cmath>
#include <sstream>

#include "segq/error.hpp"

namespace segq {

namespace {

// integral_{t0}^{t1} exp(-rate t) dt and integral_{t0}^{t1} t exp(-rate t) dt
double exp_mass(double rate, double t0, double t1)
{
    return (std::exp(-rate * t0) - std::exp(-rate * t1)) / rate;
}

double exp_moment(double rate, double t0, double t1)
{
    return ((t0 + 1.0 / rate) * std::exp(-rate * t0) - (t1 + 1.0 / rate) * std::exp(-rate * t1)) / rate;
}

// Same integrals over [t1, inf).
double exp_tail_mass(double rate, double t1) { return std::exp(-rate * t1) / rate; }
double exp_tail_moment(double rate, double t1) { return (t1 + 1.0 / rate) * std::exp(-rate * t1) / rate; }

} // namespace

double EmptyComponent::density(double t) const
{
    if (t < t0)
        return 0.0;
    if (t < t1)
        return b * std::exp(-beta * t);
    return c * std::exp(-alpha * t);
}

double EmptyComponent::mass_until(double t) const
{
    if (t <= t0)
        return 0.0;
    if (t < t1)
        return b * exp_mass(beta, t0, t);
    return b * exp_mass(beta, t0, t1) + c * (std::exp(-alpha * t1) - std::exp(-alpha * t)) / alpha;
}

double EmptyComponent::mass() const { return b * exp_mass(beta, t0, t1) + c * exp_tail_mass(alpha, t1); }

double EmptyComponent::first_moment() const
{
    return b * exp_moment(beta, t0, t1) + c * exp_tail_moment(alpha, t1);
}

double EmptyComponent::laplace(double s) const
{
    return b * (std::exp(-(s + beta) * t0) - std::exp(-(s + beta) * t1)) / (s + beta) +
           c * std::exp(-(s + alpha) * t1) / (s + alpha);
}

double DepartureModel::atom_mean() const
{
    double mean = 0.0;
    for (const auto& atom : atoms)
        mean += atom.weight * atom.time;
    return mean;
}

double DepartureModel::mean() const { return nonempty_mass() * atom_mean() + empty.first_moment(); }

double DepartureModel::empty_cdf(double t) const { return empty.mass_until(t) / p0; }

std::vector<std::string> DepartureModel::warnings() const
{
    std::vector<std::string> out;
    if (empty.negative_amplitude) {
        std::ostringstream msg;
        msg << "empty-arrival density has a negative amplitude (B = " << empty.b << ", C = " << empty.c
            << "); the two-piece fit is not a proper density for this scenario";
        out.push_back(msg.str());
    }
    return out;
}

double effective_mean_service(std::span<const double> p, const ThresholdPolicy& policy, const ServiceSpec& services)
{
    check_region_count(policy, services);
    const auto mass = policy.region_masses(p);
    double mean = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k)
        mean += mass[k] * services[k].mean();
    return mean;
}

InterdepartureComponents interdeparture_components(double p0, double arrival_rate, double effective_service)
{
    if (!(p0 > 0.0 && p0 < 1.0))
        throw ModelError("inter-departure decomposition is degenerate unless 0 < p0 < 1");
    if (!(arrival_rate > 0.0) || !(effective_service > 0.0))
        throw InvalidArgument("arrival rate and effective service time must be positive");
    InterdepartureComponents out;
    out.nonempty_mean = effective_service;
    out.empty_mean = 1.0 / (p0 * arrival_rate) - effective_service / p0 + effective_service;
    out.total = (1.0 - p0) * out.nonempty_mean + p0 * out.empty_mean;
    return out;
}

std::vector<DepartureAtom> atom_weights(std::span<const double> p, const ThresholdPolicy& policy,
                                        const ServiceSpec& services, double p0)
{
    check_region_count(policy, services);
    if (!(1.0 - p0 > 0.0))
        throw ModelError("atom weights are undefined when p0 = 1");
    auto mass = policy.region_masses(p);
    mass[0] -= p[0];
    std::vector<DepartureAtom> atoms;
    atoms.reserve(mass.size());
    for (std::size_t k = 0; k < mass.size(); ++k)
        atoms.push_back({services[k].mean(), mass[k] / (1.0 - p0)});
    return atoms;
}

EmptyComponent empty_component_params(double arrival_rate, double effective_rate, double p0,
                                      double effective_service, double t0, double t1)
{
    if (!(t0 > 0.0 && t0 < t1))
        throw InvalidArgument("empty-arrival breakpoints must satisfy 0 < t0 < t1");
    if (!(arrival_rate > 0.0) || !(effective_rate > 0.0))
        throw InvalidArgument("arrival and effective service rates must be positive");
    const auto components = interdeparture_components(p0, arrival_rate, effective_service);

    EmptyComponent out;
    out.alpha = arrival_rate;
    out.beta = 2.0 * arrival_rate * effective_rate / (arrival_rate + effective_rate);
    out.t0 = t0;
    out.t1 = t1;

    // [I0 J0; I1 J1] [B; C] = [p0; p0 * empty_mean]
    const double i0 = exp_mass(out.beta, t0, t1);
    const double i1 = exp_moment(out.beta, t0, t1);
    const double j0 = exp_tail_mass(out.alpha, t1);
    const double j1 = exp_tail_moment(out.alpha, t1);
    const double det = i0 * j1 - j0 * i1;
    const double scale = std::abs(i0 * j1) + std::abs(j0 * i1);
    if (!(std::abs(det) > 1e-14 * scale)) {
        std::ostringstream msg;
        msg << "empty-arrival moment system is singular (determinant " << det << ")";
        throw ModelError(msg.str());
    }
    const double mass = p0;
    const double moment = p0 * components.empty_mean;
    out.b = (mass * j1 - j0 * moment) / det;
    out.c = (i0 * moment - i1 * mass) / det;
    out.negative_amplitude = out.b < 0.0 || out.c < 0.0;
    return out;
}

DepartureModel build_departure_model(std::span<const double> p, double carried_load, const ThresholdPolicy& policy,
                                     const ServiceSpec& services, const ArrivalSpec& arrivals,
                                     const DepartureOptions& options)
{
    DepartureModel model;
    model.arrival_rate = arrivals.rate;
    model.p0 = options.idle_source == IdleProbabilitySource::PostDeparture ? p[0] : 1.0 - carried_load;
    model.effective_service = effective_mean_service(p, policy, services);
    model.atoms = atom_weights(p, policy, services, p[0]);
    const double t0 = options.t0.value_or(services[0].mean());
    const double rate = options.effective_rate.value_or(1.0 / model.effective_service);
    model.empty = empty_component_params(arrivals.rate, rate, model.p0, model.effective_service, t0, options.t1);
    return model;
}

double departure_laplace(const DepartureModel& model, double s)
{
    if (!(s >= 0.0))
        throw InvalidArgument("transform argument must be non-negative");
    double value = 0.0;
    for (const auto& atom : model.atoms)
        value += model.nonempty_mass() * atom.weight * std::exp(-s * atom.time);
    return value + model.empty.laplace(s);
}

nlohmann::json to_json(const DepartureModel& model)
{
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& atom : model.atoms)
        atoms.push_back({{"time", atom.time}, {"weight", atom.weight}});
    return {
        {"arrival_rate", model.arrival_rate},
        {"p0", model.p0},
        {"effective_service", model.effective_service},
        {"alpha", model.empty.alpha},
        {"beta", model.empty.beta},
        {"t0", model.empty.t0},
        {"t1", model.empty.t1},
        {"B", model.empty.b},
        {"C", model.empty.c},
        {"negative_amplitude", model.empty.negative_amplitude},
        {"atoms", atoms},
    };
}

DepartureModel departure_model_from_json(const nlohmann::json& record)
{
    try {
        DepartureModel model;
        model.arrival_rate = record.at("arrival_rate").get<double>();
        model.p0 = record.at("p0").get<double>();
        model.effective_service = record.at("effective_service").get<double>();
        model.empty.alpha = record.at("alpha").get<double>();
        model.empty.beta = record.at("beta").get<double>();
        model.empty.t0 = record.at("t0").get<double>();
        model.empty.t1 = record.at("t1").get<double>();
        model.empty.b = record.at("B").get<double>();
        model.empty.c = record.at("C").get<double>();
        model.empty.negative_amplitude = record.value("negative_amplitude", model.empty.b < 0.0 || model.empty.c < 0.0);
        for (const auto& atom : record.at("atoms"))
            model.atoms.push_back({atom.at("time").get<double>(), atom.at("weight").get<double>()});
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed departure model record: ") + e.what());
    }
}

} // namespace segq
