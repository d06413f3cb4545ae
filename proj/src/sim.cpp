#include "tvrise/sim.hpp"

#include "tvrise/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace tvrise {

bool SimState::finite() const { return x.allFinite() && theta_hat.allFinite() && mu.allFinite() && std::isfinite(P); }

namespace {

/// Packed layout: [x (n) | theta_hat (n+m) | mu (n) | P].
struct Layout {
    int n;
    int p;

    [[nodiscard]] int size() const { return 2 * n + p + 1; }

    [[nodiscard]] Vec pack(const SimState& s) const {
        Vec y(size());
        y << s.x, s.theta_hat, s.mu, s.P;
        return y;
    }

    [[nodiscard]] SimState unpack(double t, const Vec& y) const {
        return SimState{t, y.head(n), y.segment(n, p), y.segment(n + p, n), y(size() - 1)};
    }
};

/// Finite-difference step for Y_d' inside N_B.
double nb_step(const Scenario& s) { return s.horizon.dt / 100.0; }

struct Frozen {
    Vec sign;
    Branch branch = Branch::Interior;
    std::vector<bool> layer;
};

Frozen freeze(const Scenario& s, const SimState& state) {
    if (s.controller == ControllerKind::Rise) {
        SwitchSelection sel = select_switching(s, state);
        return {std::move(sel.sign), sel.branch, std::move(sel.layer)};
    }
    const Vec sign = signum(tracking_error(state.x, s.reference.xd.value(state.t)));
    return {sign, Branch::Interior, std::vector<bool>(static_cast<std::size_t>(sign.size()), false)};
}

BaselineGains effective_baseline(const Scenario& s) {
    BaselineGains g = s.baseline;
    if (s.controller == ControllerKind::Gradient) {
        g.sigma = 0.0;
    }
    return g;
}

/// Right-hand side of the closed loop with the switching frozen.
Vec rhs(const Scenario& s, const Layout& layout, double t, const Vec& y, const Frozen& frozen) {
    const SimState st = layout.unpack(t, y);
    const Vec theta = eval_theta(s.model, t);
    const AugmentedRegressor Y = eval_Y(s.model, st.x, t);
    Vec dy = Vec::Zero(layout.size());

    if (s.controller == ControllerKind::Rise) {
        const ControlEvaluation ev = evaluate_rise(s.model, s.reference, s.gains, t, st.x, st.theta_hat, st.mu,
                                                  frozen.sign, frozen.branch);
        const Vec xd_dot = s.reference.xd.rate(t);
        const Vec r = filtered_error_from_closed_loop(ev.e, Y, theta, ev.u, xd_dot, s.gains.alpha);
        const Vec nb = eval_NB(s, t, st.theta_hat, nb_step(s));
        dy.head(layout.n) = Y * theta + ev.u;
        dy.segment(layout.n, layout.p) = ev.projection.theta_hat_dot;
        dy.segment(layout.n + layout.p, layout.n) = mu_dot(ev.projection, r, ev.Yd, s.gains.K);
        dy(layout.size() - 1) = -r.dot(nb - s.gains.beta * frozen.sign);
        return dy;
    }

    const Vec e = tracking_error(st.x, s.reference.xd.value(t));
    const Vec xd_dot = s.reference.xd.rate(t);
    const BaselineGains gains = effective_baseline(s);
    if (s.controller == ControllerKind::Robust) {
        dy.head(layout.n) = Y * theta + robust_step_with_sign(e, frozen.sign, Y, xd_dot, gains);
    } else {
        const GradientStep g = sigma_mod_step(e, Y, st.theta_hat, xd_dot, gains);
        dy.head(layout.n) = Y * theta + g.u;
        dy.segment(layout.n, layout.p) = g.theta_hat_dot;
    }
    return dy;
}

Vec rk4(const Scenario& s, const Layout& layout, double t0, const Vec& y0, double h, const Frozen& frozen) {
    const Vec k1 = rhs(s, layout, t0, y0, frozen);
    const Vec k2 = rhs(s, layout, t0 + 0.5 * h, y0 + 0.5 * h * k1, frozen);
    const Vec k3 = rhs(s, layout, t0 + 0.5 * h, y0 + 0.5 * h * k2, frozen);
    const Vec k4 = rhs(s, layout, t0 + h, y0 + h * k3, frozen);
    return y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

Vec eval_NB(const Scenario& scenario, double t, const Vec& theta_hat, double h) {
    const AugmentedRegressor Yd = eval_Yd(scenario.model, scenario.reference, t);
    const Mat Yd_rate = eval_Yd_rate(scenario.model, scenario.reference, t, h);
    return Yd * eval_theta_dot(scenario.model, t) + Yd_rate * (eval_theta(scenario.model, t) - theta_hat);
}

SimState initial_state(const Scenario& scenario) {
    const int n = scenario.model.n;
    SimState s{0.0, scenario.x0, scenario.theta_hat0, Vec::Zero(n), 0.0};
    if (scenario.controller == ControllerKind::Rise) {
        const Vec e = tracking_error(s.x, scenario.reference.xd.value(0.0));
        const Vec nb = eval_NB(scenario, 0.0, s.theta_hat, nb_step(scenario));
        s.P = scenario.gains.beta * e.lpNorm<1>() - e.dot(nb);
    }
    return s;
}

SwitchSelection select_switching(const Scenario& s, const SimState& state) {
    const int n = s.model.n;
    const Vec xd = s.reference.xd.value(state.t);
    const Vec e = tracking_error(state.x, xd);
    SwitchSelection out;
    out.sign = signum(e);
    out.layer.assign(static_cast<std::size_t>(n), false);

    const double dt = s.horizon.dt;
    const double beta = s.gains.beta;
    const double eps_r = 0.5 * beta * dt;
    const double eps_e = eps_r * dt;
    const double w = 0.1 / dt;
    const double k1 = 2.0 * w;
    const double k2 = w * w;

    bool near_origin = false;
    for (int i = 0; i < n; ++i) {
        near_origin = near_origin || std::abs(e(i)) <= eps_e;
    }
    if (near_origin) {
        const Vec theta = eval_theta(s.model, state.t);
        const AugmentedRegressor Y = eval_Y(s.model, state.x, state.t);
        const AugmentedRegressor Yd = eval_Yd(s.model, s.reference, state.t);
        const Vec xd_dot = s.reference.xd.rate(state.t);
        const Vec u = control_input(Yd, state.theta_hat, e, xd_dot, state.mu, s.gains.alpha);
        const Vec r = filtered_error_from_closed_loop(e, Y, theta, u, xd_dot, s.gains.alpha);
        Vec F;
        for (int i = 0; i < n; ++i) {
            if (std::abs(e(i)) > eps_e || std::abs(r(i)) > eps_r) {
                continue;
            }
            if (F.size() == 0) {
                F = free_r_rate(s, state);
            }
            const double raw = (F(i) + k1 * r(i) + k2 * e(i)) / beta;
            if (std::abs(raw) <= 1.0) {
                out.sign(i) = raw;
                out.layer[static_cast<std::size_t>(i)] = true;
            } else if (e(i) == 0.0) {
                out.sign(i) = raw > 0.0 ? 1.0 : -1.0;
            }
        }
    }
    const AugmentedRegressor Yd = eval_Yd(s.model, s.reference, state.t);
    const Vec l0 = lambda0_from_sign(Yd, out.sign, s.gains);
    out.branch = project_update(state.theta_hat, l0, s.gains.theta_bar).branch;
    return out;
}

Vec free_r_rate(const Scenario& s, const SimState& state) {
    const double t = state.t;
    const double h = nb_step(s);
    const Vec theta = eval_theta(s.model, t);
    const AugmentedRegressor Y = eval_Y(s.model, state.x, t);
    const AugmentedRegressor Yd = eval_Yd(s.model, s.reference, t);
    const Vec xd_dot = s.reference.xd.rate(t);
    const Vec e = tracking_error(state.x, s.reference.xd.value(t));
    const Vec u = control_input(Yd, state.theta_hat, e, xd_dot, state.mu, s.gains.alpha);
    const Vec r = filtered_error_from_closed_loop(e, Y, theta, u, xd_dot, s.gains.alpha);
    const Vec x_dot = Y * theta + u;
    const Mat Y_rate = (eval_Y(s.model, state.x + h * x_dot, t + h).matrix() -
                        eval_Y(s.model, state.x - h * x_dot, t - h).matrix()) /
                       (2.0 * h);
    const Mat Yd_rate = eval_Yd_rate(s.model, s.reference, t, h);
    return Y_rate * theta + Y * eval_theta_dot(s.model, t) - Yd_rate * state.theta_hat - s.gains.K * r;
}

namespace {

/// Illinois regula falsi for the first sign change of g along the frozen
/// substep; g(0) > 0 >= g(h). Returns the step length and state just past the
/// event (g <= 0) so that the next switching evaluation sees it.
template <class G>
std::pair<double, Vec> locate_event(const Scenario& s, const Layout& layout, double t0, const Vec& y0, double h,
                                    const Vec& y1, const Frozen& frozen, G g, double g_scale) {
    double lo = 0.0;
    double hi = h;
    double g_lo = g(t0, y0);
    double g_hi = g(t0 + h, y1);
    Vec y_hi = y1;
    int side = 0;
    for (int iter = 0; iter < 100 && hi - lo > 1e-13 * h; ++iter) {
        double mid = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if (!(mid > lo && mid < hi)) {
            mid = 0.5 * (lo + hi);
        }
        const Vec y_mid = rk4(s, layout, t0, y0, mid, frozen);
        const double g_mid = g(t0 + mid, y_mid);
        if (g_mid <= 0.0) {
            hi = mid;
            g_hi = g_mid;
            y_hi = y_mid;
            if (side == 1) g_lo *= 0.5;
            side = 1;
        } else {
            lo = mid;
            g_lo = g_mid;
            if (side == -1) g_hi *= 0.5;
            side = -1;
        }
        if (g_hi >= -g_scale * 1e-14) {
            break;
        }
    }
    return {hi, y_hi};
}

} // namespace

SimState advance(const SimState& state, const Scenario& scenario, double t_target, StepEvents* events) {
    const Layout layout{scenario.model.n, scenario.model.augmented_dim()};
    const bool rise = scenario.controller == ControllerKind::Rise;
    const double radius_sq = scenario.gains.theta_bar * scenario.gains.theta_bar;
    const auto inside = [&](double, const Vec& y) {
        return radius_sq - y.segment(layout.n, layout.p).squaredNorm();
    };

    SimState current = state;
    for (int event = 0;; ++event) {
        const double t0 = current.t;
        const double h = t_target - t0;
        const Frozen frozen = freeze(scenario, current);
        const Vec y0 = layout.pack(current);
        const Vec y1 = rk4(scenario, layout, t0, y0, h, frozen);
        if (!rise || event == kMaxEventsPerStep) {
            return layout.unpack(t_target, y1);
        }

        double best_h = h;
        Vec best_y;
        bool best_is_boundary = false;
        // An interior substep may start on the sphere (Lambda0 pointing inward);
        // the event then fires once theta_hat moves beyond its starting radius.
        const double base = std::min(inside(t0, y0), 0.0) - radius_sq * 1e-12;
        const auto beyond = [&](double t, const Vec& y) { return inside(t, y) - base; };
        if (frozen.branch == Branch::Interior && beyond(t_target, y1) <= 0.0) {
            auto [hit, y_hit] = locate_event(scenario, layout, t0, y0, h, y1, frozen, beyond, radius_sq);
            if (hit < best_h) {
                best_h = hit;
                best_y = std::move(y_hit);
                best_is_boundary = true;
            }
        }
        for (int i = 0; i < layout.n; ++i) {
            const double si = frozen.sign(i);
            if (frozen.layer[static_cast<std::size_t>(i)] || std::abs(si) != 1.0) {
                continue;
            }
            const auto g = [&, i, si](double t, const Vec& y) {
                return si * (y(i) - scenario.reference.xd.value(t)(i));
            };
            if (!(g(t0, y0) > 0.0 && g(t_target, y1) <= 0.0)) {
                continue;
            }
            const double scale = 1.0 + std::abs(scenario.reference.xd.value(t0)(i));
            auto [hit, y_hit] = locate_event(scenario, layout, t0, y0, h, y1, frozen, g, scale);
            if (hit < best_h) {
                best_h = hit;
                best_y = std::move(y_hit);
                best_is_boundary = false;
            }
        }
        if (best_h >= h) {
            return layout.unpack(t_target, y1);
        }
        if (events != nullptr) {
            (best_is_boundary ? events->boundary_entries : events->crossings) += 1;
        }
        current = layout.unpack(t0 + best_h, best_y);
    }
}

SimState step(const SimState& state, const Scenario& scenario) {
    if (!(scenario.horizon.dt > 0.0)) {
        throw ConfigError("dt must be positive");
    }
    if (!state.finite()) {
        throw InputError("step called with a non-finite state");
    }
    return advance(state, scenario, state.t + scenario.horizon.dt);
}

Sample observe(const Scenario& s, const SimState& state) {
    Sample out;
    out.t = state.t;
    out.x = state.x;
    out.xd = s.reference.xd.value(state.t);
    out.e = tracking_error(state.x, out.xd);
    out.theta = eval_theta(s.model, state.t);
    out.theta_hat = state.theta_hat;
    out.theta_tilde = out.theta - out.theta_hat;
    out.mu = state.mu;
    out.P = state.P;
    const Vec xd_dot = s.reference.xd.rate(state.t);
    const AugmentedRegressor Y = eval_Y(s.model, state.x, state.t);
    const Frozen frozen = freeze(s, state);
    out.branch = frozen.branch;
    out.sign = frozen.sign;
    out.N_B = eval_NB(s, state.t, state.theta_hat, nb_step(s));

    if (s.controller == ControllerKind::Rise) {
        const ControlEvaluation ev = evaluate_rise(s.model, s.reference, s.gains, state.t, state.x, state.theta_hat,
                                                  state.mu, frozen.sign, frozen.branch);
        out.u = ev.u;
        out.theta_hat_dot = ev.projection.theta_hat_dot;
    } else if (s.controller == ControllerKind::Robust) {
        out.u = robust_step_with_sign(out.e, frozen.sign, Y, xd_dot, s.baseline);
        out.theta_hat_dot = Vec::Zero(state.theta_hat.size());
    } else {
        const GradientStep g = sigma_mod_step(out.e, Y, state.theta_hat, xd_dot, effective_baseline(s));
        out.u = g.u;
        out.theta_hat_dot = g.theta_hat_dot;
    }
    out.r = filtered_error_from_closed_loop(out.e, Y, out.theta, out.u, xd_dot, s.gains.alpha);
    out.V_L = 0.5 * out.r.squaredNorm() + 0.5 * out.e.squaredNorm() + out.P;
    return out;
}

TrajectoryRecord run(const Scenario& scenario) {
    scenario.validate();
    TrajectoryRecord record;
    record.n = scenario.model.n;
    record.m = scenario.model.m;
    record.dt = scenario.horizon.dt;
    record.controller = scenario.controller;

    const double dt = scenario.horizon.dt;
    const auto steps = static_cast<std::size_t>(std::floor(scenario.horizon.t_end / dt + 1e-9));
    record.samples.reserve(steps + 1);

    SimState state = initial_state(scenario);
    record.samples.push_back(observe(scenario, state));
    for (std::size_t k = 1; k <= steps; ++k) {
        StepEvents events;
        SimState next;
        try {
            next = advance(state, scenario, static_cast<double>(k) * dt, &events);
        } catch (const std::exception& ex) {
            throw DivergenceError(std::string("step failed: ") + ex.what(), k, state);
        }
        const Vec packed = Layout{record.n, record.n + record.m}.pack(next);
        if (!next.finite() || packed.cwiseAbs().maxCoeff() > kDivergenceLimit) {
            std::ostringstream os;
            os << "closed loop diverged at step " << k << " (t = " << next.t << ")";
            throw DivergenceError(os.str(), k, state);
        }
        Sample sample = observe(scenario, next);
        sample.switching = events.boundary_entries > 0 || sample.branch != record.samples.back().branch;
        sample.crossings = events.crossings;
        record.samples.push_back(std::move(sample));
        state = std::move(next);
    }
    return record;
}

} // namespace tvrise
