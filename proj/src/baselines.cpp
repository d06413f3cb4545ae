#include "tvrise/baselines.hpp"

#include "tvrise/controller.hpp"
#include "tvrise/error.hpp"

namespace tvrise {

void BaselineGains::validate(int p) const {
    if (!(k > 0.0)) {
        throw ConfigError("baseline gain k must be positive");
    }
    if (!(sigma >= 0.0) || !(a_bar > 0.0) || !(d_bar >= 0.0)) {
        throw ConfigError("baseline sigma and d_bar must be nonnegative, a_bar positive");
    }
    if (gamma.rows() != p || gamma.cols() != p || !gamma.isApprox(gamma.transpose(), 0.0)) {
        throw ConfigError("baseline gamma must be a symmetric " + std::to_string(p) + "x" + std::to_string(p) +
                          " matrix");
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(gamma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw ConfigError("baseline gamma must be positive-definite");
    }
}

GradientStep sigma_mod_step(const Vec& e, const AugmentedRegressor& Y, const Vec& theta_hat, const Vec& xd_dot,
                            const BaselineGains& gains) {
    if (e.size() != Y.n() || xd_dot.size() != Y.n() || theta_hat.size() != Y.matrix().cols() ||
        gains.gamma.rows() != theta_hat.size()) {
        throw InputError("sigma_mod_step: dimension mismatch");
    }
    GradientStep out;
    out.u = -gains.k * e - Y * theta_hat + xd_dot;
    out.theta_hat_dot = gains.gamma * (Y.matrix().transpose() * e - gains.sigma * theta_hat);
    return out;
}

Vec robust_step_with_sign(const Vec& e, const Vec& sign, const AugmentedRegressor& Y, const Vec& xd_dot,
                          const BaselineGains& gains) {
    if (e.size() != Y.n() || xd_dot.size() != Y.n() || sign.size() != Y.n()) {
        throw InputError("robust_step: dimension mismatch");
    }
    const double worst = gains.a_bar * spectral_norm(Y.yh_block()) + gains.d_bar;
    return -gains.k * e + xd_dot - worst * sign;
}

Vec robust_step(const Vec& e, const AugmentedRegressor& Y, const Vec& xd_dot, const BaselineGains& gains) {
    return robust_step_with_sign(e, signum(e), Y, xd_dot, gains);
}

} // namespace tvrise
