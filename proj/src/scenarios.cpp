#include "tvrise/analysis.hpp"
#include "tvrise/error.hpp"
#include "tvrise/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tvrise {

const char* to_string(ControllerKind kind) {
    switch (kind) {
    case ControllerKind::Rise: return "rise";
    case ControllerKind::SigmaMod: return "sigma_mod";
    case ControllerKind::Robust: return "robust";
    case ControllerKind::Gradient: return "gradient";
    }
    return "unknown";
}

ControllerKind parse_controller_kind(const std::string& name) {
    if (name == "rise") return ControllerKind::Rise;
    if (name == "sigma_mod") return ControllerKind::SigmaMod;
    if (name == "robust") return ControllerKind::Robust;
    if (name == "gradient") return ControllerKind::Gradient;
    throw IdentifierError("unknown controller '" + name + "' (expected rise, sigma_mod, robust or gradient)");
}

void Scenario::validate() const {
    const int n = model.n;
    const int m = model.m;
    if (n <= 0 || m <= 0) {
        throw ConfigError("model dimensions must be positive");
    }
    if (x0.size() != n || !x0.allFinite()) {
        throw ConfigError("x0 must be a finite vector of length " + std::to_string(n));
    }
    if (theta_hat0.size() != n + m || !theta_hat0.allFinite()) {
        throw ConfigError("theta_hat0 must be a finite vector of length " + std::to_string(n + m));
    }
    if (!(horizon.dt > 0.0)) {
        throw ConfigError("dt must be positive");
    }
    if (!(horizon.t_end >= 0.0) || !std::isfinite(horizon.t_end)) {
        throw ConfigError("t_end must be finite and nonnegative");
    }
    bounds.validate();
    gains.validate(n, m);
    baseline.validate(n + m);
    if (!(theta_hat0.norm() < gains.theta_bar)) {
        throw ConfigError("||theta_hat0|| must be strictly below theta_bar");
    }
}

namespace {

using Params = std::map<std::string, double>;

Vec scalar(double v) { return Vec::Constant(1, v); }

Vec vec2(double a, double b) {
    Vec out(2);
    out << a, b;
    return out;
}

Vec vec3(double a, double b, double c) {
    Vec out(3);
    out << a, b, c;
    return out;
}

double param(const Params& p, const char* key) { return p.at(key); }

/// x_d = A sin(w t) in every coordinate pattern used by the built-ins.
SmoothSignal sine_reference(double amp, double w) {
    return {[=](double t) { return scalar(amp * std::sin(w * t)); },
            [=](double t) { return scalar(amp * w * std::cos(w * t)); },
            [=](double t) { return scalar(-amp * w * w * std::sin(w * t)); }};
}

SmoothSignal zero_signal(int dim) {
    auto zero = [dim](double) { return Vec::Zero(dim).eval(); };
    return {zero, zero, zero};
}

void build_scalar(const Params& p, SystemModel& model, ReferenceTrajectory& reference) {
    const double mean = param(p, "a_mean");
    const double amp = param(p, "a_amp");
    const double w = param(p, "a_freq");
    model.n = 1;
    model.m = 1;
    model.yh = [](const Vec& x, double) { return Mat::Constant(1, 1, x(0)); };
    model.theta_f = {[=](double t) { return scalar(mean + amp * std::sin(w * t)); },
                     [=](double t) { return scalar(amp * w * std::cos(w * t)); },
                     [=](double t) { return scalar(-amp * w * w * std::sin(w * t)); }};
    model.disturbance = zero_signal(1);
    reference.xd = sine_reference(param(p, "ref_amp"), param(p, "ref_freq"));
}

void build_twostate(const Params& p, SystemModel& model, ReferenceTrajectory& reference) {
    const double a1 = param(p, "p1_amp");
    const double a2 = param(p, "p2_amp");
    const double p3 = param(p, "p3");
    const double da = param(p, "dist_amp");
    const double dw = param(p, "dist_freq");
    const double ra = param(p, "ref_amp");
    const double rw = param(p, "ref_freq");
    model.n = 2;
    model.m = 3;
    model.yh = [](const Vec& x, double) {
        Mat y(2, 3);
        y << x(0), x(1), 0.0, 0.0, x(0) * x(1), std::sin(x(1));
        return y;
    };
    model.theta_f = {[=](double t) { return vec3(1.0 + a1 * std::sin(t), -0.5 + a2 * std::cos(2.0 * t), p3); },
                     [=](double t) { return vec3(a1 * std::cos(t), -2.0 * a2 * std::sin(2.0 * t), 0.0); },
                     [=](double t) { return vec3(-a1 * std::sin(t), -4.0 * a2 * std::cos(2.0 * t), 0.0); }};
    model.disturbance = {[=](double t) { return vec2(da * std::sin(dw * t), da * std::cos(dw * t)); },
                         [=](double t) { return vec2(da * dw * std::cos(dw * t), -da * dw * std::sin(dw * t)); },
                         [=](double t) {
                             return vec2(-da * dw * dw * std::sin(dw * t), -da * dw * dw * std::cos(dw * t));
                         }};
    reference.xd = {[=](double t) { return vec2(ra * std::sin(rw * t), ra * std::cos(rw * t)); },
                    [=](double t) { return vec2(ra * rw * std::cos(rw * t), -ra * rw * std::sin(rw * t)); },
                    [=](double t) {
                        return vec2(-ra * rw * rw * std::sin(rw * t), -ra * rw * rw * std::cos(rw * t));
                    }};
}

void build_disturbance_only(const Params& p, SystemModel& model, ReferenceTrajectory& reference) {
    const double bias = param(p, "d_bias");
    const double amp = param(p, "d_amp");
    const double w = param(p, "d_freq");
    model.n = 1;
    model.m = 1;
    model.yh = [](const Vec&, double) { return Mat::Zero(1, 1).eval(); };
    model.theta_f = zero_signal(1);
    model.disturbance = {[=](double t) { return scalar(bias + amp * std::sin(w * t)); },
                         [=](double t) { return scalar(amp * w * std::cos(w * t)); },
                         [=](double t) { return scalar(-amp * w * w * std::sin(w * t)); }};
    reference.xd = sine_reference(param(p, "ref_amp"), param(p, "ref_freq"));
}

struct SetDefaults {
    Params params;
    double alpha;
    double K;
    std::vector<double> x0;
};

SetDefaults defaults_for(const std::string& name) {
    if (name == "S1_scalar") {
        return {{{"a_mean", 1.0}, {"a_amp", 0.5}, {"a_freq", 2.0}, {"ref_amp", 1.0}, {"ref_freq", 1.0}},
                2.0, 5.0, {1.0}};
    }
    if (name == "S3_constant_param") {
        return {{{"a_mean", 1.0}, {"a_amp", 0.0}, {"a_freq", 2.0}, {"ref_amp", 1.0}, {"ref_freq", 1.0}},
                2.0, 5.0, {1.0}};
    }
    if (name == "S2_twostate") {
        return {{{"p1_amp", 0.3},
                 {"p2_amp", 0.2},
                 {"p3", 0.8},
                 {"dist_amp", 0.1},
                 {"dist_freq", 3.0},
                 {"ref_amp", 1.0},
                 {"ref_freq", 1.0}},
                5.0, 5.0, {0.5, 0.5}};
    }
    if (name == "S4_disturbance_only") {
        return {{{"d_bias", 0.2}, {"d_amp", 0.5}, {"d_freq", 1.5}, {"ref_amp", 1.0}, {"ref_freq", 1.0}},
                2.0, 5.0, {1.0}};
    }
    throw IdentifierError("unknown scenario '" + name +
                          "' (expected S1_scalar, S2_twostate, S3_constant_param or S4_disturbance_only)");
}

} // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"};
}

std::map<std::string, double> default_trajectory_params(const std::string& set_name) {
    return defaults_for(set_name).params;
}

void build_trajectories(const TrajectorySet& set, SystemModel& model, ReferenceTrajectory& reference) {
    Params params = default_trajectory_params(set.name);
    for (const auto& [key, value] : set.params) {
        if (!params.contains(key)) {
            throw ConfigError("unknown parameter '" + key + "' for trajectory set " + set.name);
        }
        if (!std::isfinite(value)) {
            throw ConfigError("trajectory parameter '" + key + "' must be finite");
        }
        params[key] = value;
    }
    if (set.name == "S1_scalar" || set.name == "S3_constant_param") {
        build_scalar(params, model, reference);
    } else if (set.name == "S2_twostate") {
        build_twostate(params, model, reference);
    } else {
        build_disturbance_only(params, model, reference);
    }
}

void derive_bounds(Scenario& scenario, int samples) {
    // Constant signals have zero derivative bounds; any epsilon > 0 is admissible.
    constexpr double kFloor = 1e-6;
    const double horizon = std::max(scenario.horizon.t_end, 10.0);
    const SignalSup sup = sample_theta_sup(scenario.model, horizon, samples);
    scenario.bounds.theta_bar = 1.25 * sup.value;
    scenario.bounds.zeta1 = std::max(sup.rate, kFloor);
    scenario.bounds.zeta2 = std::max(sup.accel, kFloor);
    scenario.gains.theta_bar = scenario.bounds.theta_bar;
    scenario.reference.bounds = sample_reference_bounds(scenario.reference.xd, horizon, samples);
    // Pad the sampled sup so the grid can never under-report the reference bounds.
    scenario.reference.bounds.xd_bar *= 1.0 + 1e-6;
    scenario.reference.bounds.delta1 *= 1.0 + 1e-6;
    scenario.reference.bounds.delta2 *= 1.0 + 1e-6;

    const SignalSup f_sup = sample_sup(scenario.model.theta_f.value, scenario.model.theta_f.rate,
                                       scenario.model.theta_f.accel, 0.0, horizon, samples);
    const SignalSup d_sup = sample_sup(scenario.model.disturbance.value, scenario.model.disturbance.rate,
                                       scenario.model.disturbance.accel, 0.0, horizon, samples);
    scenario.baseline.a_bar = std::max(f_sup.value, kFloor);
    scenario.baseline.d_bar = d_sup.value;
}

void set_compliant_beta(Scenario& scenario, double margin) {
    const double beta_min = minimal_compliant_beta(scenario);
    if (!std::isfinite(beta_min)) {
        throw ConfigError("no beta satisfies the gain condition for alpha = " + std::to_string(scenario.gains.alpha) +
                          "; increase alpha");
    }
    // With N_B identically zero any positive beta is compliant; keep a small
    // positive floor so the gains stay valid.
    scenario.gains.beta = std::max(margin * beta_min, kMinimumBeta);
}

Scenario scenario_from_trajectories(const TrajectorySet& set) {
    const SetDefaults defaults = defaults_for(set.name);
    Scenario s;
    s.name = set.name;
    s.trajectories = set;
    build_trajectories(set, s.model, s.reference);
    // Record every parameter, defaults included, so the scenario is self-describing.
    Params merged = defaults.params;
    for (const auto& [key, value] : set.params) {
        merged[key] = value;
    }
    s.trajectories.params = merged;
    const int p = s.model.augmented_dim();
    s.x0 = Eigen::Map<const Vec>(defaults.x0.data(), static_cast<Eigen::Index>(defaults.x0.size()));
    s.theta_hat0 = Vec::Zero(p);
    s.gains.alpha = defaults.alpha;
    s.gains.K = defaults.K;
    s.gains.Gamma = Mat::Identity(p, p);
    s.baseline.k = 5.0;
    s.baseline.gamma = 10.0 * Mat::Identity(p, p);
    s.baseline.sigma = 0.1;
    s.horizon = Horizon{};
    derive_bounds(s);
    set_compliant_beta(s);
    s.validate();
    return s;
}

Scenario builtin_scenario(const std::string& name) {
    return scenario_from_trajectories(TrajectorySet{name, {}});
}

} // namespace tvrise
