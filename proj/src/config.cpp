#include "tvrise/config.hpp"

#include "tvrise/error.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

namespace tvrise {

namespace {

using json = ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        fail(where.empty() ? "/" : where, "expected an object");
    }
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (known.count(item.key()) == 0) {
            fail(where + "/" + item.key(), "unknown key");
        }
    }
}

double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        fail(where, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(where, "expected a finite number");
    }
    return d;
}

Vec get_vector(const json& v, const std::string& where, Eigen::Index size) {
    if (!v.is_array()) {
        fail(where, "expected an array of numbers");
    }
    if (static_cast<Eigen::Index>(v.size()) != size) {
        fail(where, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    }
    Vec out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        out(i) = get_number(v[static_cast<std::size_t>(i)], where + "/" + std::to_string(i));
    }
    return out;
}

/// A matrix given as a scalar (times identity), a flat array (diagonal) or an array of rows.
Mat get_matrix(const json& v, const std::string& where, Eigen::Index size) {
    if (v.is_number()) {
        return get_number(v, where) * Mat::Identity(size, size);
    }
    if (!v.is_array()) {
        fail(where, "expected a number, a diagonal array or an array of rows");
    }
    if (!v.empty() && v.front().is_number()) {
        return get_vector(v, where, size).asDiagonal();
    }
    if (static_cast<Eigen::Index>(v.size()) != size) {
        fail(where, "expected " + std::to_string(size) + " rows, got " + std::to_string(v.size()));
    }
    Mat out(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        out.row(i) = get_vector(v[static_cast<std::size_t>(i)], where + "/" + std::to_string(i), size).transpose();
    }
    return out;
}

json vector_json(const Vec& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

json matrix_json(const Mat& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(vector_json(m.row(i).transpose()));
    }
    return out;
}

const std::map<std::string, std::string>& short_key_paths() {
    static const std::map<std::string, std::string> paths = {
        {"alpha", "/gains/alpha"},      {"K", "/gains/K"},
        {"beta", "/gains/beta"},        {"Gamma", "/gains/Gamma"},
        {"theta_bar", "/bounds/theta_bar"}, {"zeta1", "/bounds/zeta1"},
        {"zeta2", "/bounds/zeta2"},     {"xd_bar", "/bounds/xd_bar"},
        {"delta1", "/bounds/delta1"},   {"delta2", "/bounds/delta2"},
        {"dt", "/horizon/dt"},          {"t_end", "/horizon/t_end"},
        {"x0", "/initial/x0"},          {"theta_hat0", "/initial/theta_hat0"},
        {"k", "/baseline/k"},           {"sigma", "/baseline/sigma"},
        {"gamma", "/baseline/gamma"},   {"a_bar", "/baseline/a_bar"},
        {"d_bar", "/baseline/d_bar"},   {"controller", "/controller"},
    };
    return paths;
}

} // namespace

const std::vector<std::string>& override_keys() {
    static const std::vector<std::string> keys = {
        "alpha", "K", "beta", "Gamma", "theta_bar", "zeta1", "zeta2", "xd_bar", "delta1", "delta2",
        "dt", "t_end", "x0", "theta_hat0", "k", "sigma", "gamma", "a_bar", "d_bar", "controller"};
    return keys;
}

ordered_json builtin_config(const std::string& name) {
    (void)default_trajectory_params(name); // rejects unknown names
    return json{{"trajectory_set", name}};
}

ordered_json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ConfigError(path + ": parse error at byte " + std::to_string(ex.byte) + ": " + ex.what());
    }
}

Scenario scenario_from_json(const ordered_json& config) {
    require_keys(config, "",
                 {"trajectory_set", "name", "trajectory_params", "controller", "horizon", "initial", "bounds", "gains",
                  "baseline"});
    if (!config.contains("trajectory_set") || !config["trajectory_set"].is_string()) {
        fail("/trajectory_set", "required string naming a built-in trajectory set");
    }
    TrajectorySet set{config["trajectory_set"].get<std::string>(), {}};
    try {
        set.params = default_trajectory_params(set.name);
    } catch (const IdentifierError& ex) {
        fail("/trajectory_set", ex.what());
    }
    if (config.contains("trajectory_params")) {
        const json& tp = config["trajectory_params"];
        if (!tp.is_object()) {
            fail("/trajectory_params", "expected an object");
        }
        for (const auto& item : tp.items()) {
            const std::string where = "/trajectory_params/" + item.key();
            if (set.params.count(item.key()) == 0) {
                fail(where, "unknown key");
            }
            set.params[item.key()] = get_number(item.value(), where);
        }
    }

    Scenario s = scenario_from_trajectories(set);
    const int p = s.model.augmented_dim();
    if (config.contains("name")) {
        if (!config["name"].is_string()) {
            fail("/name", "expected a string");
        }
        s.name = config["name"].get<std::string>();
    }
    if (config.contains("controller")) {
        if (!config["controller"].is_string()) {
            fail("/controller", "expected a string");
        }
        try {
            s.controller = parse_controller_kind(config["controller"].get<std::string>());
        } catch (const IdentifierError& ex) {
            fail("/controller", ex.what());
        }
    }

    bool horizon_changed = false;
    if (config.contains("horizon")) {
        const json& h = config["horizon"];
        require_keys(h, "/horizon", {"t_end", "dt"});
        if (h.contains("t_end")) {
            const double t_end = get_number(h["t_end"], "/horizon/t_end");
            horizon_changed = t_end != s.horizon.t_end;
            s.horizon.t_end = t_end;
        }
        if (h.contains("dt")) {
            s.horizon.dt = get_number(h["dt"], "/horizon/dt");
        }
    }
    if (config.contains("initial")) {
        const json& init = config["initial"];
        require_keys(init, "/initial", {"x0", "theta_hat0"});
        if (init.contains("x0")) {
            s.x0 = get_vector(init["x0"], "/initial/x0", s.model.n);
        }
        if (init.contains("theta_hat0")) {
            s.theta_hat0 = get_vector(init["theta_hat0"], "/initial/theta_hat0", p);
        }
    }

    const json empty = json::object();
    const json& gains = config.contains("gains") ? config["gains"] : empty;
    require_keys(gains, "/gains", {"alpha", "K", "beta", "Gamma"});
    if (gains.contains("alpha")) {
        s.gains.alpha = get_number(gains["alpha"], "/gains/alpha");
    }
    if (gains.contains("K")) {
        s.gains.K = get_number(gains["K"], "/gains/K");
    }
    if (gains.contains("Gamma")) {
        s.gains.Gamma = get_matrix(gains["Gamma"], "/gains/Gamma", p);
    }

    const json& baseline = config.contains("baseline") ? config["baseline"] : empty;
    require_keys(baseline, "/baseline", {"k", "gamma", "sigma", "a_bar", "d_bar"});
    if (baseline.contains("k")) {
        s.baseline.k = get_number(baseline["k"], "/baseline/k");
    }
    if (baseline.contains("gamma")) {
        s.baseline.gamma = get_matrix(baseline["gamma"], "/baseline/gamma", p);
    }
    if (baseline.contains("sigma")) {
        s.baseline.sigma = get_number(baseline["sigma"], "/baseline/sigma");
    }

    // Derived quantities first, then explicit values on top of them.
    if (horizon_changed) {
        derive_bounds(s);
    }
    const json& bounds = config.contains("bounds") ? config["bounds"] : empty;
    require_keys(bounds, "/bounds", {"theta_bar", "zeta1", "zeta2", "xd_bar", "delta1", "delta2"});
    if (bounds.contains("theta_bar")) {
        s.bounds.theta_bar = get_number(bounds["theta_bar"], "/bounds/theta_bar");
        s.gains.theta_bar = s.bounds.theta_bar;
    }
    if (bounds.contains("zeta1")) {
        s.bounds.zeta1 = get_number(bounds["zeta1"], "/bounds/zeta1");
    }
    if (bounds.contains("zeta2")) {
        s.bounds.zeta2 = get_number(bounds["zeta2"], "/bounds/zeta2");
    }
    if (bounds.contains("xd_bar")) {
        s.reference.bounds.xd_bar = get_number(bounds["xd_bar"], "/bounds/xd_bar");
    }
    if (bounds.contains("delta1")) {
        s.reference.bounds.delta1 = get_number(bounds["delta1"], "/bounds/delta1");
    }
    if (bounds.contains("delta2")) {
        s.reference.bounds.delta2 = get_number(bounds["delta2"], "/bounds/delta2");
    }
    if (baseline.contains("a_bar")) {
        s.baseline.a_bar = get_number(baseline["a_bar"], "/baseline/a_bar");
    }
    if (baseline.contains("d_bar")) {
        s.baseline.d_bar = get_number(baseline["d_bar"], "/baseline/d_bar");
    }

    if (gains.contains("beta")) {
        s.gains.beta = get_number(gains["beta"], "/gains/beta");
    } else {
        try {
            s.gains.validate(s.model.n, s.model.m);
        } catch (const ConfigError& ex) {
            fail("/gains", ex.what());
        }
        set_compliant_beta(s);
    }
    s.validate();
    return s;
}

ordered_json scenario_to_json(const Scenario& s) {
    json out;
    out["trajectory_set"] = s.trajectories.name;
    out["name"] = s.name;
    json params = json::object();
    for (const auto& [key, value] : s.trajectories.params) {
        params[key] = value;
    }
    out["trajectory_params"] = params;
    out["controller"] = to_string(s.controller);
    out["horizon"] = {{"t_end", s.horizon.t_end}, {"dt", s.horizon.dt}};
    out["initial"] = {{"x0", vector_json(s.x0)}, {"theta_hat0", vector_json(s.theta_hat0)}};
    out["bounds"] = {{"theta_bar", s.bounds.theta_bar},           {"zeta1", s.bounds.zeta1},
                     {"zeta2", s.bounds.zeta2},                   {"xd_bar", s.reference.bounds.xd_bar},
                     {"delta1", s.reference.bounds.delta1},       {"delta2", s.reference.bounds.delta2}};
    out["gains"] = {{"alpha", s.gains.alpha},
                    {"K", s.gains.K},
                    {"beta", s.gains.beta},
                    {"Gamma", matrix_json(s.gains.Gamma)}};
    out["baseline"] = {{"k", s.baseline.k},
                       {"gamma", matrix_json(s.baseline.gamma)},
                       {"sigma", s.baseline.sigma},
                       {"a_bar", s.baseline.a_bar},
                       {"d_bar", s.baseline.d_bar}};
    return out;
}

void apply_override(ordered_json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected KEY=VAL");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    std::string pointer;
    const auto& shorts = short_key_paths();
    if (const auto it = shorts.find(key); it != shorts.end()) {
        pointer = it->second;
    } else if (key.find('.') != std::string::npos) {
        pointer = "/" + key;
        for (char& c : pointer) {
            if (c == '.') c = '/';
        }
    } else {
        const std::string set = config.contains("trajectory_set") && config["trajectory_set"].is_string()
                                    ? config["trajectory_set"].get<std::string>()
                                    : std::string();
        std::map<std::string, double> params;
        try {
            params = default_trajectory_params(set);
        } catch (const IdentifierError&) {
        }
        if (params.count(key) == 0) {
            throw ConfigError("override '" + assignment + "': unknown key '" + key + "'");
        }
        pointer = "/trajectory_params/" + key;
    }

    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    config[json::json_pointer(pointer)] = value;
}

} // namespace tvrise
