#pragma once

#include "tvrise/scenario.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace tvrise {

using ordered_json = nlohmann::ordered_json;

/// Builds a scenario from a JSON configuration (schema in docs/config.md).
///
/// Every section except "trajectory_set" is optional. Fields left out are
/// derived exactly as for the built-in scenarios: bounds are sampled from the
/// trajectories and beta is set to 1.5x the smallest compliant value for the
/// configured alpha and Gamma. Unknown keys, wrong types and bad dimensions
/// throw ConfigError naming the offending location (a JSON pointer).
[[nodiscard]] Scenario scenario_from_json(const ordered_json& config);

/// Reads and parses a config file. Syntax errors throw ConfigError with the
/// file name and byte offset.
[[nodiscard]] ordered_json read_config_file(const std::string& path);

/// Minimal config selecting a built-in scenario.
[[nodiscard]] ordered_json builtin_config(const std::string& name);

/// Fully explicit config for a scenario. Loading it back reproduces the
/// scenario bit for bit.
[[nodiscard]] ordered_json scenario_to_json(const Scenario& scenario);

/// Applies one KEY=VAL override to a config before it is turned into a
/// scenario. KEY is either a short name (alpha, K, beta, Gamma, theta_bar,
/// zeta1, zeta2, xd_bar, delta1, delta2, dt, t_end, x0, theta_hat0, k, sigma,
/// gamma, a_bar, d_bar, controller, or a parameter of the trajectory set) or a
/// dotted path such as gains.beta. VAL is parsed as JSON, falling back to a
/// plain string. Throws ConfigError on an unknown key or malformed value.
void apply_override(ordered_json& config, const std::string& assignment);

/// Short override keys, in documentation order.
[[nodiscard]] const std::vector<std::string>& override_keys();

} // namespace tvrise
