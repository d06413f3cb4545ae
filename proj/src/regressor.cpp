#include "tvrise/regressor.hpp"

#include "tvrise/error.hpp"

#include <algorithm>
#include <cmath>

namespace tvrise {

AugmentedRegressor::AugmentedRegressor(const Mat& yh) : matrix_(yh.rows(), yh.cols() + yh.rows()) {
    if (!yh.allFinite()) {
        throw InputError("regressor Y_h has non-finite entries");
    }
    matrix_.leftCols(yh.cols()) = yh;
    matrix_.rightCols(yh.rows()).setIdentity();
}

AugmentedRegressor eval_Y(const SystemModel& model, const Vec& x, double t) {
    if (x.size() != model.n) {
        throw InputError("state has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(model.n));
    }
    if (!x.allFinite()) {
        throw InputError("state is not finite");
    }
    Mat yh = model.yh(x, t);
    if (yh.rows() != model.n || yh.cols() != model.m) {
        throw InputError("Y_h returned a matrix of the wrong shape");
    }
    return AugmentedRegressor(yh);
}

AugmentedRegressor eval_Yd(const SystemModel& model, const ReferenceTrajectory& reference, double t) {
    return eval_Y(model, reference.xd.value(t), t);
}

Mat eval_Yd_rate(const SystemModel& model, const ReferenceTrajectory& reference, double t, double h) {
    return (eval_Yd(model, reference, t + h).matrix() - eval_Yd(model, reference, t - h).matrix()) / (2.0 * h);
}

Mat eval_Yd_accel(const SystemModel& model, const ReferenceTrajectory& reference, double t, double h) {
    return (eval_Yd(model, reference, t + h).matrix() - 2.0 * eval_Yd(model, reference, t).matrix() +
            eval_Yd(model, reference, t - h).matrix()) /
           (h * h);
}

double spectral_norm(const Mat& a) {
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

double estimate_Yd_bar(const SystemModel& model, const ReferenceTrajectory& reference, double horizon,
                       double spacing) {
    const auto steps = static_cast<long>(std::ceil(horizon / spacing));
    double sup = 0.0;
    for (long i = 0; i <= steps; ++i) {
        const double t = std::min(horizon, spacing * static_cast<double>(i));
        sup = std::max(sup, spectral_norm(eval_Yd(model, reference, t).matrix()));
    }
    return sup * (1.0 + 1e-6);
}

} // namespace tvrise
