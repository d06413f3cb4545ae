#pragma once

#include "tvrise/regressor.hpp"

namespace tvrise {

/// Gains of the RISE-like adaptive controller.
///
/// Gamma is block diagonal with Gamma1 (m x m, parameters) and Gamma2 (n x n,
/// disturbance) on the diagonal. theta_bar is the radius of the projection ball.
struct GainSet {
    double alpha = 1.0;
    double K = 1.0;
    double beta = 1.0;
    Mat Gamma;
    double theta_bar = 1.0;

    /// Structural checks: alpha, beta, K, theta_bar > 0; Gamma symmetric
    /// positive-definite with zero off-diagonal blocks for the given split.
    /// K > 1/2 is not enforced here; the Lyapunov report flags it.
    void validate(int n, int m) const;

    [[nodiscard]] static Mat block_gamma(const Mat& gamma1, const Mat& gamma2);
    [[nodiscard]] Mat gamma2_block(int n) const { return Gamma.bottomRightCorner(n, n); }
};

enum class Branch { Interior, Boundary };

[[nodiscard]] const char* to_string(Branch b);

/// Tolerance on ||theta_hat|| <= theta_bar * (1 + kProjectionSlack).
inline constexpr double kProjectionSlack = 1e-9;
/// The boundary branch is considered once ||theta_hat|| >= theta_bar * (1 - kBoundaryThickness).
inline constexpr double kBoundaryThickness = 1e-12;
/// Condition-number ceiling for the (Y_d Gamma Y_d^T) solve.
inline constexpr double kMaxConditionNumber = 1e12;

struct ErrorSignals {
    Vec e;
    Vec r;
};

/// e = x - x_d.
[[nodiscard]] Vec tracking_error(const Vec& x, const Vec& xd);

/// r = Y theta + u - x_d' + alpha e, the filtered error along the true closed loop.
[[nodiscard]] Vec filtered_error_from_closed_loop(const Vec& e, const AugmentedRegressor& Y, const Vec& theta,
                                                  const Vec& u, const Vec& xd_dot, double alpha);

/// u = -Y_d theta_hat - alpha e + x_d' + mu.
[[nodiscard]] Vec control_input(const AugmentedRegressor& Yd, const Vec& theta_hat, const Vec& e,
                                const Vec& xd_dot, const Vec& mu, double alpha);

/// Componentwise sign with sgn(0) = 0.
[[nodiscard]] Vec signum(const Vec& v);

/// Lambda0 = Gamma Y_d^T (Y_d Gamma Y_d^T)^{-1} beta sgn(e).
[[nodiscard]] Vec lambda0(const AugmentedRegressor& Yd, const Vec& e, const GainSet& gains);

/// Same as lambda0 but with the sign vector supplied directly (frozen switching).
[[nodiscard]] Vec lambda0_from_sign(const AugmentedRegressor& Yd, const Vec& sign, const GainSet& gains);

/// Gradient of f(theta) = theta^T theta - theta_bar^2.
[[nodiscard]] inline Vec boundary_gradient(const Vec& theta_hat) { return 2.0 * theta_hat; }

/// Outcome of the projection switch. The same object drives both the estimate
/// update and mu', so the two laws can never disagree on the branch.
struct ProjectionResult {
    Branch branch = Branch::Interior;
    Vec lambda0;
    Vec lambda1; ///< Tangential projection of lambda0 (computed on both branches).
    Vec theta_hat_dot;
};

/// Decides the branch for theta_hat and returns proj(Lambda0).
[[nodiscard]] ProjectionResult project_update(const Vec& theta_hat, const Vec& lambda0, double theta_bar);

/// Evaluates the projected update on a branch chosen elsewhere (frozen within an integration step).
[[nodiscard]] ProjectionResult project_on_branch(const Vec& theta_hat, const Vec& lambda0, Branch branch);

/// Interior: -K r. Boundary: -K r - Y_d (Lambda0 - Lambda1).
/// Throws InvariantError if the projection result is internally inconsistent.
[[nodiscard]] Vec mu_dot(const ProjectionResult& projection, const Vec& r, const AugmentedRegressor& Yd, double K);

/// Everything the controller computes at one instant.
struct ControlEvaluation {
    Vec e;
    Vec sign;
    AugmentedRegressor Yd;
    Vec u;
    ProjectionResult projection;
};

/// Evaluates the RISE control law at (t, x, theta_hat, mu) on a given branch and sign vector.
[[nodiscard]] ControlEvaluation evaluate_rise(const SystemModel& model, const ReferenceTrajectory& reference,
                                              const GainSet& gains, double t, const Vec& x, const Vec& theta_hat,
                                              const Vec& mu, const Vec& sign, Branch branch);

/// Branch and sign at (t, x, theta_hat): the single switching evaluation used for a step.
struct SwitchDecision {
    Vec sign;
    Branch branch = Branch::Interior;
};

[[nodiscard]] SwitchDecision decide_switching(const SystemModel& model, const ReferenceTrajectory& reference,
                                              const GainSet& gains, double t, const Vec& x, const Vec& theta_hat);

} // namespace tvrise
