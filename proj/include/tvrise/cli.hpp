#pragma once

#include "tvrise/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tvrise::cli {

/// Process exit statuses.
enum ExitCode : int {
    kOk = 0,
    kConfigFailure = 1,      ///< bad config, bad arguments, unreadable or corrupt input
    kCertificateFailure = 2, ///< a certified invariant failed (gain condition, P >= 0, projection, update-rate, ...)
    kDiverged = 3,           ///< the closed loop blew up
};

struct RunConfig {
    std::string scenario = "S1_scalar"; ///< built-in name, used when config_path is empty
    std::string config_path;            ///< JSON config file
    std::vector<std::string> overrides; ///< KEY=VAL, applied in order
    std::string output_dir = "out";
    std::vector<std::string> controllers{"rise"};
    std::uint64_t seed = 1;
    std::optional<double> dt;
    std::optional<double> t_end;
};

/// Resolves the scenario described by a run config. Throws ConfigError,
/// IdentifierError or InputError on bad input.
[[nodiscard]] Scenario load_scenario(const RunConfig& config);

/// Runs every requested controller and writes <controller>.csv,
/// <controller>.summary.json, scenario.json and, for more than one
/// controller, compare.json into output_dir.
[[nodiscard]] int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs the RISE controller on the scenario and the full invariant suite,
/// including the randomized inverse-norm sweep seeded with config.seed.
[[nodiscard]] int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Emits a matplotlib script for one or more trajectory CSVs (overlaid when several).
[[nodiscard]] int cmd_plot(const std::vector<std::string>& csv_paths, const std::string& output_dir, std::ostream& out,
                           std::ostream& err);

/// Plot script text for already-validated CSVs.
struct PlotSource {
    std::string path;             ///< CSV path embedded in the script
    std::string label;            ///< legend entry
    std::vector<double> switches; ///< times of projection-branch switches
};
[[nodiscard]] std::string plot_script(const std::vector<PlotSource>& sources);

/// Full command-line entry point (subcommands run, verify, plot).
[[nodiscard]] int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tvrise::cli
