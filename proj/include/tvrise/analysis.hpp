#pragma once

#include "tvrise/sim.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tvrise {

/// Safety factor applied to every sampled sup in the bound estimates.
inline constexpr double kBoundSafety = 1.1;

/// Numerical estimates of the constants the gain condition consumes.
struct BoundReport {
    double gamma1 = 0.0;         ///< bound on ||N_B||
    double gamma2 = 0.0;         ///< bound on ||N_B'|| at the scenario's beta
    double gamma2_static = 0.0;  ///< part of gamma2 independent of beta
    double gamma2_per_beta = 0.0; ///< gamma2 = gamma2_static + gamma2_per_beta * beta
    double gamma3 = 0.0;         ///< update-rate bound beta ||Gamma|| Yd_bar / lambda_min(Gamma2)
    double Yd_bar = 0.0;         ///< sup ||Y_d||_2
    double inverse_norm_bound = 0.0;   ///< 1 / lambda_min(Gamma2)
    double beta_required = 0.0;  ///< gamma1 + gamma2 / alpha
    double beta_minimal = 0.0;   ///< smallest beta with beta > gamma1 + gamma2(beta)/alpha (inf if none)
    bool gain_condition_met = false;
};

/// Sup bounds (gamma1, gamma2) of N_B = Y_d theta' + Y_d' theta - Y_d' theta_hat over a grid
/// of `grid` times, with theta_hat replaced by its worst case on the ball
/// (||Y_d' theta_hat|| -> ||Y_d'||_2 theta_bar) and theta_hat' by the update-rate bound.
[[nodiscard]] BoundReport estimate_NB_bounds(const Scenario& scenario, int grid = 10000);

struct GainCheck {
    bool met = false;
    double margin = 0.0; ///< beta - (gamma1 + gamma2/alpha)
};

[[nodiscard]] GainCheck check_gain_condition(const GainSet& gains, const BoundReport& report);

/// Smallest beta meeting the gain condition for the scenario's alpha and Gamma.
[[nodiscard]] double minimal_compliant_beta(const Scenario& scenario, int grid = 10000);

struct InverseBoundResult {
    double inverse_norm = 0.0; ///< ||(Y Gamma Y^T)^{-1}||_2
    double bound = 0.0;        ///< 1 / lambda_min(Gamma2)
    bool pass = false;
};

/// Throws InvariantError if Y Gamma Y^T is not positive-definite.
[[nodiscard]] InverseBoundResult inverse_bound_check(const AugmentedRegressor& Yd, const Mat& Gamma);

/// Inverse-norm bound over random regressors and block-diagonal gains.
struct InverseBoundSweep {
    int draws = 0;
    int failures = 0;          ///< draws with ||(Y Gamma Y^T)^{-1}|| > bound (1 + slack)
    double worst_ratio = 0.0;  ///< max ||(Y Gamma Y^T)^{-1}|| / bound
    double tight_gap = 0.0;    ///< |inverse norm - bound| for Y_h = 0, where equality holds
    bool pass = false;
};

/// Draws `draws` pairs (Y_h, Gamma) with n, m in [1, 4], Y_h Gaussian and the
/// Gamma blocks random SPD with eigenvalues in [0.05, 5]; also checks the
/// Y_h = 0 case, which attains the bound.
[[nodiscard]] InverseBoundSweep inverse_bound_randomized(std::uint64_t seed, int draws = 1000, double slack = 1e-9);

struct UpdateRateResult {
    double sup_rate = 0.0; ///< finite-differenced sup ||theta_hat'||
    double gamma3 = 0.0;
    std::size_t worst_index = 0;
    bool pass = false;
};

[[nodiscard]] double update_rate_bound(const GainSet& gains, int n, double Yd_bar);
[[nodiscard]] UpdateRateResult update_rate_check(const TrajectoryRecord& record, const GainSet& gains, double Yd_bar);

/// Per-step V_L increase tolerance on compliant runs.
inline constexpr double kLyapunovStepTolerance = 1e-8;
/// Lower bound accepted for min_t P(t).
inline constexpr double kCertificateTolerance = 1e-6;

struct LyapunovReport {
    double min_P = 0.0;
    double max_VL_increase = 0.0;  ///< max_k V_L(k+1) - V_L(k)
    std::size_t worst_step = 0;
    bool monotone = false;         ///< max_VL_increase <= kLyapunovStepTolerance
    double c_fit = 0.0;            ///< least-squares c in  -dV_L/dt ~ c ||z||^2
    double c_certified = 0.0;      ///< largest c with dV_L <= -c ||z||^2 dt + tol at every step
    bool decay_inequality_holds = false;
    double z_decay_rate = 0.0;     ///< least-squares slope of log(||z||^2) against t
    double lambda3 = 0.0;          ///< min{alpha, K - 1/2}
    bool lambda3_positive = false;
    bool P_nonnegative = false;    ///< min_P >= -kCertificateTolerance
};

[[nodiscard]] LyapunovReport lyapunov_report(const TrajectoryRecord& record, const GainSet& gains);

struct ProjectionReport {
    double max_norm = 0.0;
    double max_tangency = 0.0; ///< max grad f^T theta_hat' over boundary samples (-inf if none)
    std::size_t boundary_samples = 0;
    bool ball_ok = false;      ///< max_norm <= theta_bar + 1e-6
    bool tangency_ok = false;  ///< max_tangency <= 1e-9
};

[[nodiscard]] ProjectionReport projection_report(const TrajectoryRecord& record, double theta_bar);

/// sup_k || r - [(Y - Y_d) theta + Y_d theta_tilde + mu] || over the record (RISE only).
[[nodiscard]] double identity_residual(const TrajectoryRecord& record, const Scenario& scenario);

struct NtildeReport {
    double rho_hat = 0.0;        ///< sup ||N~|| / ||z|| over samples with ||z|| > z_floor
    double max_at_small_z = 0.0; ///< sup ||N~|| over samples with ||z|| <= z_floor
    double z_floor = 0.0;
    bool region_certificate = false; ///< lambda3 >= rho_hat^2 / 2
};

/// N~ = (Y' - Y_d') theta + (Y - Y_d) theta' + e with Y' by central differences along the record.
[[nodiscard]] NtildeReport ntilde_report(const TrajectoryRecord& record, const Scenario& scenario,
                                         double z_floor = 1e-6);

struct RdotResidual {
    std::vector<double> residual; ///< per step; NaN where excluded
    double sup = 0.0;             ///< sup over admissible steps
    std::size_t admissible = 0;
};

/// Compares the forward difference of r with the closed-loop expression
///   (Y' - Y_d') theta + (Y - Y_d) theta' + Y_d' theta_tilde + Y_d theta' - beta sgn(e) - K r,
/// excluding steps at projection switches or where sgn(e) changes. Diagnostic only.
[[nodiscard]] RdotResidual closed_loop_r_dot_check(const TrajectoryRecord& record, const Scenario& scenario,
                                                   double t_from = 0.0);

/// Summary metrics over the record.
struct RunMetrics {
    double final_error_norm = 0.0;
    double final_window_rms = 0.0;  ///< RMS of ||e|| over the final 10% of samples
    double final_window_max = 0.0;  ///< max ||e|| over the final 10%
    double sup_x = 0.0;
    double sup_u = 0.0;
    double sup_theta_hat = 0.0;
    double sup_mu = 0.0;
    double sup_r = 0.0;
    double sup_P = 0.0;
    double min_P = 0.0;
    std::size_t switches = 0;   ///< samples flagged as projection switches
    std::size_t crossings = 0;  ///< located sgn(e) zero crossings
};

[[nodiscard]] RunMetrics run_metrics(const TrajectoryRecord& record, double final_fraction = 0.1);

/// One verification outcome for a completed RISE run.
struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerificationReport {
    BoundReport bounds;
    GainCheck gain;
    LyapunovReport lyapunov;
    ProjectionReport projection;
    UpdateRateResult update_rate;
    NtildeReport ntilde;
    double identity_residual = 0.0;
    std::vector<CheckOutcome> checks;

    [[nodiscard]] bool all_pass() const;
    /// Certificates whose failure makes `run` exit with status 2.
    [[nodiscard]] bool certified() const;
};

[[nodiscard]] VerificationReport verify_run(const TrajectoryRecord& record, const Scenario& scenario);

} // namespace tvrise
