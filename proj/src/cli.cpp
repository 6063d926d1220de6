#include "segq/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>

#include "segq/error.hpp"

namespace segq {

namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw InvalidArgument("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

void write_json(const std::filesystem::path& path, const json& doc)
{
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

json metadata(std::string_view command, const Config& config)
{
    return {{"command", command},
            {"seed", config.simulation.seed},
            {"pso_seed", config.pso.seed},
            {"horizon", config.simulation.horizon},
            {"config", to_json(config)}};
}

json evaluation_json(const DesignEvaluation& e)
{
    return {{"thresholds", e.thresholds},
            {"normalized_power", number_or_null(e.normalized_power)},
            {"w_queue", number_or_null(e.w_queue)},
            {"w_channel", number_or_null(e.w_channel)},
            {"w_system", number_or_null(e.w_system)},
            {"feasible", e.feasible},
            {"reason", e.reason}};
}

QueueAnalysis analyze(const Config& config)
{
    return analyze_queue(config.policy, config.services, config.arrivals, config.analysis.delay_variant,
                         config.analysis.epoch_mode);
}

DepartureModel departure_of(const Config& config, const QueueAnalysis& analysis)
{
    return build_departure_model(analysis.post_departure.probabilities, analysis.delay.carried_load, config.policy,
                                 config.services, config.arrivals, config.departure);
}

int run_analyze(const Config& config, const std::filesystem::path& dir, std::ostream& log)
{
    const auto result = analyze(config);
    const auto& d = result.delay;
    json summary = {{"metadata", metadata("analyze", config)},
                    {"post_departure", result.post_departure.probabilities},
                    {"arbitrary_epoch", result.arbitrary_epoch.probabilities},
                    {"fixed_point_residual", result.post_departure.residual},
                    {"mean_departure_interval", d.mean_departure_interval},
                    {"carried_load", d.carried_load},
                    {"mean_system_time", d.mean_system_time},
                    {"mean_system_time_ahead_only", d.mean_system_time_ahead_only},
                    {"mean_system_time_lst_consistent", d.mean_system_time_lst_consistent}};
    write_json(dir / "analyze.json", summary);

    auto p_csv = open_output(dir / "post_departure.csv");
    p_csv << "length,probability,region\n";
    for (std::size_t i = 0; i < result.post_departure.size(); ++i)
        p_csv << i << ',' << result.post_departure[i] << ',' << config.policy.region_of(static_cast<int>(i)) << '\n';
    auto pi_csv = open_output(dir / "arbitrary_epoch.csv");
    pi_csv << "waiting,probability\n";
    for (std::size_t j = 0; j < result.arbitrary_epoch.size(); ++j)
        pi_csv << j << ',' << result.arbitrary_epoch[j] << '\n';

    log << std::setprecision(6) << "T_mean = " << d.mean_departure_interval << " s, rho' = " << d.carried_load
        << ", E[W] = " << d.mean_system_time << " s (ahead-only " << d.mean_system_time_ahead_only
        << ", lst-consistent " << d.mean_system_time_lst_consistent << ")\n";
    return exit_code::ok;
}

int run_depart(const Config& config, const std::filesystem::path& dir, std::ostream& log)
{
    const auto analysis = analyze(config);
    const auto model = departure_of(config, analysis);
    const auto parts = interdeparture_components(model.p0, model.arrival_rate, model.effective_service);
    json record = to_json(model);
    record["metadata"] = metadata("depart", config);
    record["A"] = parts.nonempty_mean;
    record["B_mean"] = parts.empty_mean;
    record["mean"] = model.mean();
    record["warnings"] = model.warnings();
    write_json(dir / "departure.json", record);

    auto csv = open_output(dir / "laplace.csv");
    csv << "s,laplace\n";
    csv << 0.0 << ',' << departure_laplace(model, 0.0) << '\n';
    for (int k = 0; k <= 40; ++k) {
        const double s = std::pow(10.0, -1.0 + 0.125 * k);
        csv << s << ',' << departure_laplace(model, s) << '\n';
    }
    log << std::setprecision(6) << "p0 = " << model.p0 << ", t_E = " << model.effective_service
        << " s, B = " << parts.empty_mean << " s\n";
    for (const auto& w : model.warnings())
        log << "warning: " << w << '\n';
    return exit_code::ok;
}

int run_channel(const Config& config, const std::filesystem::path& dir, std::ostream& log)
{
    const auto analysis = analyze(config);
    const auto model = departure_of(config, analysis);
    const auto result = analyze_channel(model, config.channel);
    json doc = {{"metadata", metadata("channel", config)},
                {"sigma", result.sigma},
                {"wait", result.wait},
                {"sojourn", result.sojourn},
                {"w_channel", config.analysis.channel_delay == ChannelDelay::Sojourn ? result.sojourn : result.wait},
                {"attended_rate", config.channel.attended_rate()},
                {"iterations", result.iterations},
                {"used_bisection", result.used_bisection}};
    write_json(dir / "channel.json", doc);
    log << std::setprecision(6) << "sigma = " << result.sigma << ", wait = " << result.wait
        << " s, sojourn = " << result.sojourn << " s\n";
    return exit_code::ok;
}

int run_optimize(const Config& config, const std::filesystem::path& dir, std::ostream& log)
{
    const auto context = config.design_context();
    const auto brute = brute_force_search(context);
    const auto pso = pso_search(context, config.pso);

    json doc = {{"metadata", metadata("optimize", config)},
                {"brute_force",
                 {{"best", brute.best ? evaluation_json(*brute.best) : json(nullptr)},
                  {"evaluations", brute.evaluations}}},
                {"pso",
                 {{"best", pso.best ? evaluation_json(*pso.best) : json(nullptr)},
                  {"evaluations", pso.evaluations},
                  {"position_visits", pso.position_visits}}}};
    write_json(dir / "optimize.json", doc);

    auto csv = open_output(dir / "pso_trace.csv");
    csv << "iteration,best_objective,best_thresholds,evaluations\n";
    for (const auto& row : pso.trace) {
        csv << row.iteration << ',';
        if (std::isfinite(row.best_objective))
            csv << row.best_objective;
        csv << ',';
        for (std::size_t k = 0; k < row.best_thresholds.size(); ++k)
            csv << (k ? ";" : "") << row.best_thresholds[k];
        csv << ',' << row.evaluations << '\n';
    }

    if (!brute.best) {
        log << "no feasible design (delay bound " << config.delay_bound << " s)\n";
        return exit_code::model;
    }
    auto show = [&](const char* label, const DesignEvaluation& e, std::size_t evaluations) {
        log << label << ": thresholds";
        for (int l : e.thresholds)
            log << ' ' << l;
        log << std::setprecision(8) << ", NP = " << e.normalized_power << ", W_system = " << e.w_system << " s, "
            << evaluations << " evaluations\n";
    };
    show("brute force", *brute.best, brute.evaluations);
    if (pso.best)
        show("pso", *pso.best, pso.evaluations);
    else
        log << "pso: no feasible design found\n";
    return exit_code::ok;
}

int run_simulate(const Config& config, const std::filesystem::path& dir, const RunOptions& options,
                 std::ostream& log)
{
    auto sim = config.sim_config();
    sim.record_intervals = options.write_samples;
    const auto stats = simulate_queue(sim);
    const auto network = simulate_network(sim);

    json queue = {{"arrivals", stats.arrivals},
                  {"departures_total", stats.departures_total},
                  {"drops", stats.drops},
                  {"in_system_at_end", stats.in_system_at_end},
                  {"departures", stats.departures},
                  {"observed_time", stats.observed_time},
                  {"sojourn_mean", stats.sojourn.mean},
                  {"sojourn_half_width", stats.sojourn.half_width},
                  {"mean_interdeparture", stats.mean_interdeparture},
                  {"mean_interdeparture_empty", stats.mean_interdeparture_empty},
                  {"mean_interdeparture_nonempty", stats.mean_interdeparture_nonempty},
                  {"empty_departures", stats.empty_departures},
                  {"nonempty_departures", stats.nonempty_departures},
                  {"busy_fraction", stats.busy_fraction},
                  {"time_average_in_system", stats.time_average_in_system},
                  {"throughput", stats.throughput},
                  {"blocking_fraction", stats.blocking_fraction},
                  {"region_service_counts", stats.region_service_counts},
                  {"nonempty_region_counts", stats.nonempty_region_counts}};
    json net = {{"queues", network.queues},
                {"packets", network.packets},
                {"observed_time", network.observed_time},
                {"wait_mean", network.wait.mean},
                {"wait_half_width", network.wait.half_width},
                {"sojourn_mean", network.sojourn.mean},
                {"sojourn_half_width", network.sojourn.half_width},
                {"visit_rates", network.visit_rates},
                {"transmit_rates", network.transmit_rates}};
    write_json(dir / "simulate.json", {{"metadata", metadata("simulate", config)}, {"queue", queue}, {"network", net}});

    auto hist = open_output(dir / "histogram.csv");
    hist << "length,system_fraction,buffer_fraction\n";
    for (std::size_t n = 0; n < stats.system_histogram.size(); ++n) {
        hist << n << ',' << stats.system_histogram[n] << ',';
        if (n < stats.buffer_histogram.size())
            hist << stats.buffer_histogram[n];
        hist << '\n';
    }
    if (options.write_samples) {
        auto csv = open_output(dir / "interdeparture.csv");
        csv << "duration,empty_arrival,region\n";
        for (const auto& s : stats.intervals)
            csv << s.duration << ',' << (s.empty_arrival ? 1 : 0) << ',' << s.region << '\n';
    }
    log << std::setprecision(6) << "mean sojourn = " << stats.sojourn.mean << " +/- " << stats.sojourn.half_width
        << " s, mean inter-departure = " << stats.mean_interdeparture << " s, channel wait = " << network.wait.mean
        << " s (seed " << config.simulation.seed << ")\n";
    return exit_code::ok;
}

int run_validate(const Config& config, const std::filesystem::path& dir, std::ostream& log)
{
    const auto rows = validation_table(config);
    auto csv = open_output(dir / "validation.csv");
    csv << "quantity,analytic,simulated,metric,error,tolerance,passed\n";
    json list = json::array();
    bool all = true;
    for (const auto& r : rows) {
        csv << r.quantity << ',' << r.analytic << ',' << r.simulated << ',' << r.metric << ',' << r.error << ','
            << r.tolerance << ',' << (r.passed ? "pass" : "fail") << '\n';
        list.push_back({{"quantity", r.quantity},
                        {"analytic", r.analytic},
                        {"simulated", r.simulated},
                        {"metric", r.metric},
                        {"error", r.error},
                        {"tolerance", r.tolerance},
                        {"passed", r.passed}});
        all = all && r.passed;
    }
    write_json(dir / "validation.json", {{"metadata", metadata("validate", config)}, {"rows", list}});

    log << std::left << std::setw(34) << "quantity" << std::setw(14) << "analytic" << std::setw(14) << "simulated"
        << std::setw(12) << "error" << std::setw(10) << "tolerance" << "result\n";
    for (const auto& r : rows) {
        log << std::setw(34) << r.quantity << std::setprecision(6) << std::setw(14) << r.analytic << std::setw(14)
            << r.simulated << std::setw(12) << r.error << std::setw(10) << r.tolerance << (r.passed ? "pass" : "FAIL")
            << '\n';
    }
    return all ? exit_code::ok : exit_code::model;
}

ValidationRow relative_row(std::string quantity, double analytic, double simulated, double tolerance)
{
    const double error = std::abs(simulated - analytic) / std::abs(analytic);
    return {std::move(quantity), analytic, simulated, "relative", error, tolerance, error <= tolerance};
}

ValidationRow absolute_row(std::string quantity, double analytic, double simulated, double tolerance)
{
    const double error = std::abs(simulated - analytic);
    return {std::move(quantity), analytic, simulated, "absolute", error, tolerance, error <= tolerance};
}

} // namespace

std::filesystem::path resolve_output_dir(const Config& config, const RunOptions& options)
{
    if (options.out_dir)
        return *options.out_dir;
    if (const char* env = std::getenv("SEGQ_OUT_DIR"); env != nullptr && *env != '\0')
        return env;
    return config.output_dir;
}

Config apply_overrides(Config config, const RunOptions& options)
{
    if (options.seed) {
        config.simulation.seed = *options.seed;
        config.pso.seed = *options.seed;
    }
    if (options.horizon) {
        config.simulation.horizon = *options.horizon;
        config.sim_config().validate();
    }
    return config;
}

std::vector<ValidationRow> validation_table(const Config& config)
{
    const auto analysis = analyze(config);
    const auto model = departure_of(config, analysis);
    const auto parts = interdeparture_components(model.p0, model.arrival_rate, model.effective_service);
    const bool deterministic_nonempty = config.services[0].is_deterministic();

    auto sim = config.sim_config();
    sim.record_intervals = deterministic_nonempty;
    const auto stats = simulate_queue(sim);
    const auto network = simulate_network(sim);
    const auto channel = analyze_channel(model, config.channel);

    std::vector<ValidationRow> rows;
    rows.push_back(relative_row("mean system time", analysis.delay.mean_system_time, stats.sojourn.mean, 0.02));
    rows.push_back(
        relative_row("mean inter-departure time", 1.0 / config.arrivals.rate, stats.mean_interdeparture, 0.01));
    rows.push_back(
        relative_row("non-empty inter-departure mean", parts.nonempty_mean, stats.mean_interdeparture_nonempty, 0.02));
    rows.push_back(relative_row("empty inter-departure mean", parts.empty_mean, stats.mean_interdeparture_empty, 0.02));
    rows.push_back(relative_row("carried load", analysis.delay.carried_load, stats.busy_fraction, 0.01));

    // Non-empty departures by region; with deterministic services these are the atoms.
    for (std::size_t k = 0; k < model.atoms.size(); ++k) {
        const double observed = stats.nonempty_departures
                                    ? static_cast<double>(stats.nonempty_region_counts[k]) /
                                          static_cast<double>(stats.nonempty_departures)
                                    : 0.0;
        rows.push_back(absolute_row("atom weight region " + std::to_string(k + 1), model.atoms[k].weight, observed,
                                    0.02));
    }

    // Largest pointwise gap between the arbitrary-epoch buffer law and the simulated one.
    double gap = 0.0;
    std::size_t worst = 0;
    for (std::size_t j = 0; j < analysis.arbitrary_epoch.size(); ++j) {
        const double d = std::abs(analysis.arbitrary_epoch[j] - stats.buffer_histogram[j]);
        if (d > gap) {
            gap = d;
            worst = j;
        }
    }
    rows.push_back(absolute_row("buffer occupancy (worst length)", analysis.arbitrary_epoch[worst],
                                stats.buffer_histogram[worst], 0.01));

    if (deterministic_nonempty) {
        std::vector<double> empty;
        for (const auto& s : stats.intervals)
            if (s.empty_arrival)
                empty.push_back(s.duration);
        const double ks = ks_distance(std::move(empty), [&](double t) { return model.empty_cdf(t); });
        rows.push_back({"empty-arrival law (KS distance)", 0.0, ks, "absolute", ks, 0.1, ks <= 0.1});
    }

    const double little = stats.throughput * stats.sojourn.mean;
    rows.push_back(relative_row("Little's law", stats.time_average_in_system, little, 0.01));
    rows.push_back(relative_row("channel sojourn", channel.sojourn, network.sojourn.mean, 0.10));
    return rows;
}

int run_subcommand(std::string_view name, const Config& base, const RunOptions& options, std::ostream& log)
{
    try {
        const Config config = apply_overrides(base, options);
        const auto dir = resolve_output_dir(config, options);
        std::filesystem::create_directories(dir);
        if (name == "analyze")
            return run_analyze(config, dir, log);
        if (name == "depart")
            return run_depart(config, dir, log);
        if (name == "channel")
            return run_channel(config, dir, log);
        if (name == "optimize")
            return run_optimize(config, dir, log);
        if (name == "simulate")
            return run_simulate(config, dir, options, log);
        if (name == "validate")
            return run_validate(config, dir, log);
        log << "error: unknown subcommand \"" << name << "\"\n";
        return exit_code::input;
    } catch (const UnstableError& e) {
        log << "unstable: " << e.what() << '\n';
        return exit_code::model;
    } catch (const ModelError& e) {
        log << "model error: " << e.what() << '\n';
        return exit_code::model;
    } catch (const InvalidArgument& e) {
        log << "input error: " << e.what() << '\n';
        return exit_code::input;
    } catch (const std::filesystem::filesystem_error& e) {
        log << "input error: " << e.what() << '\n';
        return exit_code::input;
    }
}

} // namespace segq
