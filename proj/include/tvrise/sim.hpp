#pragma once

#include "tvrise/scenario.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tvrise {

/// Integrated state of the closed loop. For baseline controllers mu and P stay zero.
struct SimState {
    double t = 0.0;
    Vec x;
    Vec theta_hat;
    Vec mu;
    double P = 0.0;

    [[nodiscard]] bool finite() const;
};

/// The closed loop blew up or produced a non-finite value.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step_index, SimState last_good)
        : std::runtime_error(what), step_index_(step_index), last_good_(std::move(last_good)) {}

    [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }
    [[nodiscard]] const SimState& last_good_state() const noexcept { return last_good_; }

private:
    std::size_t step_index_;
    SimState last_good_;
};

/// Any state component above this magnitude aborts the run.
inline constexpr double kDivergenceLimit = 1e9;
inline constexpr int kMaxEventsPerStep = 64;

/// One recorded instant.
struct Sample {
    double t = 0.0;
    Vec x;
    Vec xd;
    Vec e;
    Vec r;
    Vec u;
    Vec theta;
    Vec theta_hat;
    Vec theta_tilde;
    Vec mu;
    double P = 0.0;
    double V_L = 0.0;
    Branch branch = Branch::Interior;
    bool switching = false; ///< branch changed since the previous sample, or a boundary event inside the step

    Vec sign;          ///< switching selection frozen for the step that starts here
    int crossings = 0; ///< sgn(e) zero crossings located inside the step that ended here
    Vec theta_hat_dot; ///< update law evaluated at this sample on its branch
    Vec N_B;           ///< Y_d theta' + Y_d' theta - Y_d' theta_hat
};

struct TrajectoryRecord {
    int n = 0;
    int m = 0;
    double dt = 0.0;
    ControllerKind controller = ControllerKind::Rise;
    std::vector<Sample> samples;
};

/// Sample evaluated at a state, using the switching decision that the next step will freeze.
[[nodiscard]] Sample observe(const Scenario& scenario, const SimState& state);

/// Initial state: x0, theta_hat0, mu = 0, P(0) = beta sum|e_i(0)| - e(0)^T N_B(0).
[[nodiscard]] SimState initial_state(const Scenario& scenario);

/// Switching selection frozen across one integration (sub)step.
///
/// Away from e_i = 0 this is sgn(e_i). Inside the layer |e_i| <= eps_e,
/// |r_i| <= eps_r (eps_r = beta dt / 2, eps_e = eps_r dt) the selection is an
/// element of the Filippov set [-1, 1] that holds e_i = r_i = 0: it cancels
/// the sign-free part F of r' and adds a stabilizing term,
///   s_i = (F_i + k1 r_i + k2 e_i) / beta,   k1 = 2 w, k2 = w^2, w = 1/(10 dt),
/// falling back to sgn(e_i) whenever |s_i| would exceed 1.
struct SwitchSelection {
    Vec sign;
    Branch branch = Branch::Interior;
    std::vector<bool> layer; ///< component uses the Filippov layer selection
};

[[nodiscard]] SwitchSelection select_switching(const Scenario& scenario, const SimState& state);

/// Sign-free part of r' for the RISE loop: r' = F - beta s, with
///   F = Y' theta + Y theta' - Y_d' theta_hat - K r.
[[nodiscard]] Vec free_r_rate(const Scenario& scenario, const SimState& state);

struct StepEvents {
    int crossings = 0;        ///< located sgn(e_i) zero crossings
    int boundary_entries = 0; ///< located projection-ball entries
};

/// Advances the state to t_target with RK4; the switching selection and the
/// projection branch are frozen over each substep. A substep ends early at
/// the first located event (a sign-driven e_i crossing zero, or theta_hat
/// leaving the ball on the interior branch) and the selection is re-evaluated
/// there. At most kMaxEventsPerStep events are resolved per call.
[[nodiscard]] SimState advance(const SimState& state, const Scenario& scenario, double t_target,
                               StepEvents* events = nullptr);

/// One step of size scenario.horizon.dt.
[[nodiscard]] SimState step(const SimState& state, const Scenario& scenario);

/// Integrates from 0 to t_end, recording every step. Throws DivergenceError on blow-up.
[[nodiscard]] TrajectoryRecord run(const Scenario& scenario);

/// N_B with Y_d' from a central difference of step h.
[[nodiscard]] Vec eval_NB(const Scenario& scenario, double t, const Vec& theta_hat, double h);

} // namespace tvrise
