#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "segq/channel.hpp"
#include "segq/cli.hpp"
#include "segq/config.hpp"
#include "segq/departure.hpp"
#include "segq/error.hpp"
#include "segq/optimizer.hpp"
#include "segq/queue_core.hpp"

namespace py = pybind11;
using nlohmann::json;

// Configs cross the boundary as JSON text; the Python layer converts to dicts.
namespace {

segq::Config config_of(const std::string& text)
{
    json document;
    try {
        document = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw segq::InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    return segq::parse_config(document);
}

json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

json evaluation_json(const segq::DesignEvaluation& e)
{
    return {{"thresholds", e.thresholds},
            {"normalized_power", number_or_null(e.normalized_power)},
            {"w_queue", number_or_null(e.w_queue)},
            {"w_channel", number_or_null(e.w_channel)},
            {"w_system", number_or_null(e.w_system)},
            {"feasible", e.feasible},
            {"reason", e.reason}};
}

segq::QueueAnalysis analysis_of(const segq::Config& c)
{
    return segq::analyze_queue(c.policy, c.services, c.arrivals, c.analysis.delay_variant, c.analysis.epoch_mode);
}

segq::DepartureModel departure_of(const segq::Config& c, const segq::QueueAnalysis& a)
{
    return segq::build_departure_model(a.post_departure.probabilities, a.delay.carried_load, c.policy, c.services,
                                       c.arrivals, c.departure);
}

std::string analyze(const std::string& text)
{
    const auto config = config_of(text);
    const auto a = analysis_of(config);
    return json{{"post_departure", a.post_departure.probabilities},
                {"arbitrary_epoch", a.arbitrary_epoch.probabilities},
                {"fixed_point_residual", a.post_departure.residual},
                {"mean_departure_interval", a.delay.mean_departure_interval},
                {"carried_load", a.delay.carried_load},
                {"mean_system_time", a.delay.mean_system_time}}
        .dump();
}

std::string depart(const std::string& text, const std::vector<double>& s_values)
{
    const auto config = config_of(text);
    const auto model = departure_of(config, analysis_of(config));
    const auto parts = segq::interdeparture_components(model.p0, model.arrival_rate, model.effective_service);
    json record = segq::to_json(model);
    record["A"] = parts.nonempty_mean;
    record["B_mean"] = parts.empty_mean;
    record["mean"] = model.mean();
    record["warnings"] = model.warnings();
    json lst = json::array();
    for (double s : s_values)
        lst.push_back(segq::departure_laplace(model, s));
    record["laplace"] = lst;
    return record.dump();
}

std::string channel(const std::string& text)
{
    const auto config = config_of(text);
    const auto r = segq::analyze_channel(departure_of(config, analysis_of(config)), config.channel);
    return json{{"sigma", r.sigma}, {"wait", r.wait}, {"sojourn", r.sojourn}, {"used_bisection", r.used_bisection}}
        .dump();
}

std::string evaluate(const std::string& text, const std::vector<int>& thresholds)
{
    return evaluation_json(segq::evaluate_design(thresholds, config_of(text).design_context())).dump();
}

std::string brute_force(const std::string& text)
{
    const auto result = segq::brute_force_search(config_of(text).design_context());
    return json{{"best", result.best ? evaluation_json(*result.best) : json(nullptr)},
                {"evaluations", result.evaluations}}
        .dump();
}

std::string pso(const std::string& text, std::optional<std::uint64_t> seed)
{
    const auto config = config_of(text);
    auto settings = config.pso;
    if (seed)
        settings.seed = *seed;
    const auto result = segq::pso_search(config.design_context(), settings);
    return json{{"best", result.best ? evaluation_json(*result.best) : json(nullptr)},
                {"evaluations", result.evaluations},
                {"position_visits", result.position_visits}}
        .dump();
}

std::string validate(const std::string& text)
{
    json rows = json::array();
    for (const auto& row : segq::validation_table(config_of(text)))
        rows.push_back({{"quantity", row.quantity},
                        {"analytic", row.analytic},
                        {"simulated", row.simulated},
                        {"metric", row.metric},
                        {"error", row.error},
                        {"tolerance", row.tolerance},
                        {"passed", row.passed}});
    return rows.dump();
}

std::pair<int, std::string> run(const std::string& subcommand, const std::string& text, const std::string& out_dir)
{
    const auto config = config_of(text);
    segq::RunOptions options;
    options.out_dir = out_dir;
    std::ostringstream log;
    const int code = segq::run_subcommand(subcommand, config, options, log);
    return {code, log.str()};
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Threshold-controlled queue analysis, optimization and simulation";

    py::register_exception<segq::InvalidArgument>(m, "InputError", PyExc_ValueError);
    py::register_exception<segq::ModelError>(m, "ModelError", PyExc_RuntimeError);

    m.def("analyze", &analyze, py::arg("config"));
    m.def("depart", &depart, py::arg("config"), py::arg("s_values") = std::vector<double>{});
    m.def("channel", &channel, py::arg("config"));
    m.def("evaluate", &evaluate, py::arg("config"), py::arg("thresholds"));
    m.def("brute_force", &brute_force, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("pso", &pso, py::arg("config"), py::arg("seed") = py::none(), py::call_guard<py::gil_scoped_release>());
    m.def("validate", &validate, py::arg("config"), py::call_guard<py::gil_scoped_release>());
    m.def("run", &run, py::arg("subcommand"), py::arg("config"), py::arg("out_dir"),
          py::call_guard<py::gil_scoped_release>());
}
