#pragma once

#include "tvrise/baselines.hpp"
#include "tvrise/controller.hpp"
#include "tvrise/model.hpp"

#include <map>
#include <string>
#include <vector>

namespace tvrise {

enum class ControllerKind { Rise, SigmaMod, Robust, Gradient };

[[nodiscard]] const char* to_string(ControllerKind kind);
/// Accepts rise, sigma_mod, robust, gradient. Throws IdentifierError otherwise.
[[nodiscard]] ControllerKind parse_controller_kind(const std::string& name);

struct Horizon {
    double t_end = 40.0;
    double dt = 1e-3;
};

/// Named closed-form trajectory set plus its scalar parameters. Scenarios are
/// rebuilt from this description, so configs never carry code.
struct TrajectorySet {
    std::string name;
    std::map<std::string, double> params;
};

/// A complete experiment.
struct Scenario {
    std::string name;
    TrajectorySet trajectories;
    SystemModel model;
    ReferenceTrajectory reference;
    ParameterBounds bounds;
    GainSet gains;
    BaselineGains baseline;
    Vec x0;
    Vec theta_hat0;
    Horizon horizon;
    ControllerKind controller = ControllerKind::Rise;

    /// Type-level invariants: dimensions, gain structure, ||theta_hat0|| < theta_bar, dt > 0, t_end >= 0.
    void validate() const;
};

/// Names accepted by builtin_scenario.
[[nodiscard]] std::vector<std::string> builtin_scenario_names();

/// Default parameters of a trajectory set. Throws IdentifierError on unknown names.
[[nodiscard]] std::map<std::string, double> default_trajectory_params(const std::string& set_name);

/// Builds model and reference for a trajectory set. Unknown parameter keys throw ConfigError.
void build_trajectories(const TrajectorySet& set, SystemModel& model, ReferenceTrajectory& reference);

/// Analytic-by-sampling bounds: theta_bar = 1.25 sup||theta||, zeta1, zeta2, and reference bounds.
void derive_bounds(Scenario& scenario, int samples = 100000);

/// Floor applied by set_compliant_beta when the gain condition needs no switching gain.
inline constexpr double kMinimumBeta = 1e-3;

/// Sets gains.beta to margin x the minimal value satisfying the gain condition
/// (at least kMinimumBeta). Throws ConfigError when no beta can satisfy it for
/// the current alpha.
void set_compliant_beta(Scenario& scenario, double margin = 1.5);

/// S1_scalar, S2_twostate, S3_constant_param, S4_disturbance_only.
[[nodiscard]] Scenario builtin_scenario(const std::string& name);

/// Builds a scenario for a trajectory set with default gains, bounds and a compliant beta.
[[nodiscard]] Scenario scenario_from_trajectories(const TrajectorySet& set);

} // namespace tvrise
