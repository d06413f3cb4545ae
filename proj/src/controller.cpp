#include "tvrise/controller.hpp"

#include "tvrise/error.hpp"

#include <cmath>
#include <sstream>

namespace tvrise {

namespace {

void require_same_size(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size()) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a.size() << " vs " << b.size() << ")";
        throw InputError(os.str());
    }
}

} // namespace

void GainSet::validate(int n, int m) const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(K > 0.0) || !(theta_bar > 0.0)) {
        throw ConfigError("gains alpha, K, beta and theta_bar must be strictly positive");
    }
    const int p = n + m;
    if (Gamma.rows() != p || Gamma.cols() != p) {
        throw ConfigError("Gamma must be " + std::to_string(p) + "x" + std::to_string(p));
    }
    if (!Gamma.allFinite() || !Gamma.isApprox(Gamma.transpose(), 0.0)) {
        throw ConfigError("Gamma must be symmetric");
    }
    if (!Gamma.topRightCorner(m, n).isZero(0.0) || !Gamma.bottomLeftCorner(n, m).isZero(0.0)) {
        throw ConfigError("Gamma must be block diagonal (off-diagonal blocks exactly zero)");
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(Gamma);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw ConfigError("Gamma must be positive-definite");
    }
}

Mat GainSet::block_gamma(const Mat& gamma1, const Mat& gamma2) {
    Mat out = Mat::Zero(gamma1.rows() + gamma2.rows(), gamma1.cols() + gamma2.cols());
    out.topLeftCorner(gamma1.rows(), gamma1.cols()) = gamma1;
    out.bottomRightCorner(gamma2.rows(), gamma2.cols()) = gamma2;
    return out;
}

const char* to_string(Branch b) { return b == Branch::Interior ? "interior" : "boundary"; }

Vec tracking_error(const Vec& x, const Vec& xd) {
    require_same_size(x, xd, "tracking_error");
    return x - xd;
}

Vec filtered_error_from_closed_loop(const Vec& e, const AugmentedRegressor& Y, const Vec& theta, const Vec& u,
                                   const Vec& xd_dot, double alpha) {
    if (theta.size() != Y.matrix().cols()) {
        throw InputError("filtered_error: theta does not match regressor width");
    }
    require_same_size(e, u, "filtered_error");
    require_same_size(e, xd_dot, "filtered_error");
    if (e.size() != Y.n()) {
        throw InputError("filtered_error: e does not match regressor height");
    }
    return Y * theta + u - xd_dot + alpha * e;
}

Vec control_input(const AugmentedRegressor& Yd, const Vec& theta_hat, const Vec& e, const Vec& xd_dot,
                  const Vec& mu, double alpha) {
    if (theta_hat.size() != Yd.matrix().cols()) {
        throw InputError("control_input: theta_hat does not match regressor width");
    }
    require_same_size(e, xd_dot, "control_input");
    require_same_size(e, mu, "control_input");
    if (e.size() != Yd.n()) {
        throw InputError("control_input: e does not match regressor height");
    }
    return -(Yd * theta_hat) - alpha * e + xd_dot + mu;
}

Vec signum(const Vec& v) {
    return v.unaryExpr([](double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); });
}

Vec lambda0_from_sign(const AugmentedRegressor& Yd, const Vec& sign, const GainSet& gains) {
    const Mat& Y = Yd.matrix();
    if (sign.size() != Y.rows() || gains.Gamma.rows() != Y.cols()) {
        throw InputError("lambda0: dimension mismatch between Y_d, e and Gamma");
    }
    if (sign.isZero(0.0)) {
        return Vec::Zero(Y.cols());
    }
    const Mat gamma_yt = gains.Gamma * Y.transpose();
    const Mat gram = Y * gamma_yt;
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Y_d Gamma Y_d^T is not positive-definite; Gamma is malformed");
    }
    // Symmetric positive-definite: cond = lambda_max / lambda_min.
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
    const double cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
    if (!(cond <= kMaxConditionNumber)) {
        throw NumericalError("Y_d Gamma Y_d^T is ill-conditioned (cond = " + std::to_string(cond) + ")");
    }
    return gamma_yt * llt.solve(gains.beta * sign);
}

Vec lambda0(const AugmentedRegressor& Yd, const Vec& e, const GainSet& gains) {
    return lambda0_from_sign(Yd, signum(e), gains);
}

ProjectionResult project_on_branch(const Vec& theta_hat, const Vec& lambda0, Branch branch) {
    require_same_size(theta_hat, lambda0, "project_update");
    ProjectionResult out;
    out.branch = branch;
    out.lambda0 = lambda0;
    const Vec grad = boundary_gradient(theta_hat);
    const double grad_sq = grad.squaredNorm();
    if (grad_sq > 0.0) {
        out.lambda1 = lambda0 - grad * (grad.dot(lambda0) / grad_sq);
    } else if (branch == Branch::Boundary) {
        throw InvariantError("projection boundary branch with zero gradient");
    } else {
        out.lambda1 = lambda0;
    }
    out.theta_hat_dot = branch == Branch::Interior ? out.lambda0 : out.lambda1;
    return out;
}

ProjectionResult project_update(const Vec& theta_hat, const Vec& lambda0, double theta_bar) {
    require_same_size(theta_hat, lambda0, "project_update");
    const bool on_boundary = theta_hat.norm() >= theta_bar * (1.0 - kBoundaryThickness);
    const bool outward = boundary_gradient(theta_hat).dot(lambda0) > 0.0;
    return project_on_branch(theta_hat, lambda0, on_boundary && outward ? Branch::Boundary : Branch::Interior);
}

Vec mu_dot(const ProjectionResult& projection, const Vec& r, const AugmentedRegressor& Yd, double K) {
    const Vec& expected = projection.branch == Branch::Interior ? projection.lambda0 : projection.lambda1;
    if (projection.theta_hat_dot.size() != expected.size() || projection.theta_hat_dot != expected) {
        throw InvariantError("mu' branch does not match the projection branch");
    }
    if (r.size() != Yd.n()) {
        throw InputError("mu_dot: r does not match regressor height");
    }
    Vec out = -K * r;
    if (projection.branch == Branch::Boundary) {
        out -= Yd * (projection.lambda0 - projection.lambda1);
    }
    return out;
}

SwitchDecision decide_switching(const SystemModel& model, const ReferenceTrajectory& reference, const GainSet& gains,
                                double t, const Vec& x, const Vec& theta_hat) {
    const Vec e = tracking_error(x, reference.xd.value(t));
    SwitchDecision out;
    out.sign = signum(e);
    const AugmentedRegressor Yd = eval_Yd(model, reference, t);
    out.branch = project_update(theta_hat, lambda0_from_sign(Yd, out.sign, gains), gains.theta_bar).branch;
    return out;
}

ControlEvaluation evaluate_rise(const SystemModel& model, const ReferenceTrajectory& reference, const GainSet& gains,
                                double t, const Vec& x, const Vec& theta_hat, const Vec& mu, const Vec& sign,
                                Branch branch) {
    Vec e = tracking_error(x, reference.xd.value(t));
    AugmentedRegressor Yd = eval_Yd(model, reference, t);
    Vec u = control_input(Yd, theta_hat, e, reference.xd.rate(t), mu, gains.alpha);
    ProjectionResult projection = project_on_branch(theta_hat, lambda0_from_sign(Yd, sign, gains), branch);
    return ControlEvaluation{std::move(e), sign, std::move(Yd), std::move(u), std::move(projection)};
}

} // namespace tvrise
