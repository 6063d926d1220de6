#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "segq/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Segmented-queue delay, departure, channel and power analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    bool samples = false;
    app.add_option("--config", config_path, "Scenario file (JSON)")->required();
    app.add_option("--out", out_dir, "Output directory (overrides SEGQ_OUT_DIR and output_dir)");
    app.add_option("--seed", seed, "Seed for simulation and PSO");
    app.add_option("--horizon", horizon, "Simulated departures per queue");
    app.add_flag("--samples", samples, "simulate: also write raw inter-departure samples");

    const std::map<std::string_view, std::string> descriptions{
        {"analyze", "Embedded-chain and arbitrary-epoch distributions, mean system time"},
        {"depart", "Inter-departure model: atoms, empty-arrival fit, Laplace transform"},
        {"channel", "Channel waiting and sojourn time from the G/M/1 fixed point"},
        {"optimize", "Threshold search by brute force and particle swarm"},
        {"simulate", "Event-driven simulation of the queue and the shared channel"},
        {"validate", "Analytic results against simulation; exit 1 if any check fails"}};
    for (auto name : segq::subcommands)
        app.add_subcommand(std::string(name), descriptions.at(name));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : segq::exit_code::input;
    }

    segq::RunOptions options;
    if (out_dir)
        options.out_dir = *out_dir;
    options.seed = seed;
    options.horizon = horizon;
    options.write_samples = samples;

    try {
        const auto config = segq::load_config(config_path);
        return segq::run_subcommand(app.get_subcommands().front()->get_name(), config, options, std::cout);
    } catch (const segq::InvalidArgument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return segq::exit_code::input;
    }
}
