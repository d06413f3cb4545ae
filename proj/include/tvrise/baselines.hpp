#pragma once

#include "tvrise/regressor.hpp"

namespace tvrise {

/// Gains for the comparison controllers.
struct BaselineGains {
    double k = 1.0;     ///< proportional feedback gain
    Mat gamma;          ///< adaptation gain, (n+m) x (n+m) positive-definite
    double sigma = 0.0; ///< leakage
    double a_bar = 1.0; ///< worst-case bound on ||theta_f|| (robust controller)
    double d_bar = 0.0; ///< worst-case bound on ||d|| (robust controller)

    void validate(int p) const;
};

struct GradientStep {
    Vec u;
    Vec theta_hat_dot;
};

/// Certainty-equivalence gradient law with sigma-modification:
///   u = -k e - Y theta_hat + x_d',   theta_hat' = gamma Y^T e - sigma gamma theta_hat.
/// sigma = 0 gives the classic gradient law.
[[nodiscard]] GradientStep sigma_mod_step(const Vec& e, const AugmentedRegressor& Y, const Vec& theta_hat,
                                          const Vec& xd_dot, const BaselineGains& gains);

/// Worst-case robust tracking law
///   u = -k e + x_d' - (a_bar ||Y_h(x,t)||_2 + d_bar) sgn(e).
/// For a scalar plant with Y_h = [x] and x_d = 0 this is u = -k x - a_bar x.
[[nodiscard]] Vec robust_step(const Vec& e, const AugmentedRegressor& Y, const Vec& xd_dot, const BaselineGains& gains);

/// robust_step with sgn(e) supplied (frozen across an integration step).
[[nodiscard]] Vec robust_step_with_sign(const Vec& e, const Vec& sign, const AugmentedRegressor& Y, const Vec& xd_dot,
                                        const BaselineGains& gains);

} // namespace tvrise
