#pragma once

#include "tvrise/model.hpp"

namespace tvrise {

/// Y = [Y_h | I_n], an n x (n+m) matrix whose right block is the identity.
class AugmentedRegressor {
public:
    /// Builds [yh | I]; throws InputError if yh has non-finite entries.
    explicit AugmentedRegressor(const Mat& yh);

    [[nodiscard]] const Mat& matrix() const { return matrix_; }
    [[nodiscard]] int n() const { return static_cast<int>(matrix_.rows()); }
    [[nodiscard]] int m() const { return static_cast<int>(matrix_.cols() - matrix_.rows()); }
    [[nodiscard]] auto yh_block() const { return matrix_.leftCols(m()); }

    [[nodiscard]] Vec operator*(const Vec& v) const { return matrix_ * v; }

private:
    Mat matrix_;
};

/// Augmented regressor at state x and time t. Throws InputError on non-finite x.
[[nodiscard]] AugmentedRegressor eval_Y(const SystemModel& model, const Vec& x, double t);

/// Desired regressor Y_d(t) = Y(x_d(t), t).
[[nodiscard]] AugmentedRegressor eval_Yd(const SystemModel& model, const ReferenceTrajectory& reference, double t);

/// Central-difference estimate of dY_d/dt with step h.
[[nodiscard]] Mat eval_Yd_rate(const SystemModel& model, const ReferenceTrajectory& reference, double t, double h);

/// Central second difference of Y_d with step h.
[[nodiscard]] Mat eval_Yd_accel(const SystemModel& model, const ReferenceTrajectory& reference, double t, double h);

/// Sampled sup of the spectral norm of Y_d over [0, horizon] at the given spacing, times (1 + 1e-6).
[[nodiscard]] double estimate_Yd_bar(const SystemModel& model, const ReferenceTrajectory& reference, double horizon,
                                     double spacing);

[[nodiscard]] double spectral_norm(const Mat& a);

} // namespace tvrise
