#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace tvrise {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A closed-form signal of time together with its first two derivatives.
struct SmoothSignal {
    std::function<Vec(double)> value;
    std::function<Vec(double)> rate;
    std::function<Vec(double)> accel;
};

/// Control-affine plant  x' = Y_h(x,t) theta_f(t) + d(t) + u.
struct SystemModel {
    int n = 0; ///< state dimension
    int m = 0; ///< dimension of theta_f
    std::function<Mat(const Vec&, double)> yh;
    SmoothSignal theta_f;
    SmoothSignal disturbance;

    [[nodiscard]] int augmented_dim() const { return n + m; }
};

struct ReferenceBounds {
    double xd_bar = 0.0; ///< sup ||x_d||
    double delta1 = 0.0; ///< sup ||x_d'||
    double delta2 = 0.0; ///< sup ||x_d''||
};

struct ReferenceTrajectory {
    SmoothSignal xd;
    ReferenceBounds bounds;
};

/// Known bounds on the augmented parameter and its derivatives.
struct ParameterBounds {
    double theta_bar = 0.0;
    double zeta1 = 0.0;
    double zeta2 = 0.0;

    /// Throws ConfigError unless every bound is strictly positive.
    void validate() const;
};

/// Augmented parameter [theta_f(t); d(t)].
[[nodiscard]] Vec eval_theta(const SystemModel& model, double t);
[[nodiscard]] Vec eval_theta_dot(const SystemModel& model, double t);
[[nodiscard]] Vec eval_theta_ddot(const SystemModel& model, double t);

/// Sampled sup-norms of a signal and its derivatives over [t0, t1].
struct SignalSup {
    double value = 0.0;
    double rate = 0.0;
    double accel = 0.0;
};

[[nodiscard]] SignalSup sample_sup(const std::function<Vec(double)>& value,
                                   const std::function<Vec(double)>& rate,
                                   const std::function<Vec(double)>& accel,
                                   double t0, double t1, int samples);

/// Sup of ||theta||, ||theta'||, ||theta''|| sampled on [0, horizon].
[[nodiscard]] SignalSup sample_theta_sup(const SystemModel& model, double horizon, int samples);

/// Sup of ||x_d||, ||x_d'||, ||x_d''|| sampled on [0, horizon].
[[nodiscard]] ReferenceBounds sample_reference_bounds(const SmoothSignal& xd, double horizon, int samples);

/// Checks the sampled boundedness and finiteness invariants of a model on [0, horizon].
/// Throws ConfigError naming the first violation.
void check_model(const SystemModel& model, const ParameterBounds& bounds, double horizon, int samples = 10000);

/// Checks sampled reference bounds and the x_d' finite-difference consistency.
void check_reference(const ReferenceTrajectory& ref, double horizon, int samples = 10000);

} // namespace tvrise
