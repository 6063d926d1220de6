#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "segq/config.hpp"

namespace segq {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int model = 1; // infeasible, unstable or failed validation
inline constexpr int input = 2;
} // namespace exit_code

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;    // overrides simulation.seed and pso.seed
    std::optional<std::uint64_t> horizon; // overrides simulation.horizon
    bool write_samples = false;           // raw inter-departure samples from simulate
};

// --out, then SEGQ_OUT_DIR, then the config's output_dir.
std::filesystem::path resolve_output_dir(const Config& config, const RunOptions& options);

// Applies the seed and horizon overrides.
Config apply_overrides(Config config, const RunOptions& options);

struct ValidationRow {
    std::string quantity;
    double analytic;
    double simulated;
    std::string metric; // "relative" or "absolute"
    double error;
    double tolerance;
    bool passed;
};

// Analytic-versus-simulation comparisons for one scenario.
std::vector<ValidationRow> validation_table(const Config& config);

inline const std::vector<std::string_view> subcommands{"analyze", "depart", "channel", "optimize", "simulate",
                                                       "validate"};

// Runs one subcommand, writes its artifacts and returns the exit code.
// Progress and the reason for a non-zero exit go to `log`.
int run_subcommand(std::string_view name, const Config& config, const RunOptions& options, std::ostream& log);

} // namespace segq
