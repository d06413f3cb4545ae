#include "tvrise/model.hpp"

#include "tvrise/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tvrise {

void ParameterBounds::validate() const {
    if (!(theta_bar > 0.0) || !(zeta1 > 0.0) || !(zeta2 > 0.0)) {
        std::ostringstream os;
        os << "parameter bounds must be strictly positive (theta_bar=" << theta_bar << ", zeta1=" << zeta1
           << ", zeta2=" << zeta2 << ")";
        throw ConfigError(os.str());
    }
}

namespace {

Vec stack(const Vec& top, const Vec& bottom) {
    Vec out(top.size() + bottom.size());
    out << top, bottom;
    return out;
}

} // namespace

Vec eval_theta(const SystemModel& model, double t) {
    return stack(model.theta_f.value(t), model.disturbance.value(t));
}

Vec eval_theta_dot(const SystemModel& model, double t) {
    return stack(model.theta_f.rate(t), model.disturbance.rate(t));
}

Vec eval_theta_ddot(const SystemModel& model, double t) {
    return stack(model.theta_f.accel(t), model.disturbance.accel(t));
}

SignalSup sample_sup(const std::function<Vec(double)>& value, const std::function<Vec(double)>& rate,
                     const std::function<Vec(double)>& accel, double t0, double t1, int samples) {
    SignalSup sup;
    const int count = std::max(samples, 2);
    for (int i = 0; i < count; ++i) {
        const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(count - 1);
        sup.value = std::max(sup.value, value(t).norm());
        sup.rate = std::max(sup.rate, rate(t).norm());
        sup.accel = std::max(sup.accel, accel(t).norm());
    }
    return sup;
}

SignalSup sample_theta_sup(const SystemModel& model, double horizon, int samples) {
    return sample_sup([&](double t) { return eval_theta(model, t); },
                      [&](double t) { return eval_theta_dot(model, t); },
                      [&](double t) { return eval_theta_ddot(model, t); }, 0.0, horizon, samples);
}

ReferenceBounds sample_reference_bounds(const SmoothSignal& xd, double horizon, int samples) {
    const SignalSup sup = sample_sup(xd.value, xd.rate, xd.accel, 0.0, horizon, samples);
    return {sup.value, sup.rate, sup.accel};
}

void check_model(const SystemModel& model, const ParameterBounds& bounds, double horizon, int samples) {
    bounds.validate();
    const int count = std::max(samples, 2);
    const double h = horizon / static_cast<double>(count - 1);
    Vec previous = eval_theta(model, 0.0);
    for (int i = 0; i < count; ++i) {
        const double t = h * static_cast<double>(i);
        const Vec theta = eval_theta(model, t);
        if (!theta.allFinite()) {
            throw ConfigError("augmented parameter is not finite at t=" + std::to_string(t));
        }
        if (theta.norm() > bounds.theta_bar) {
            std::ostringstream os;
            os << "||theta(" << t << ")|| = " << theta.norm() << " exceeds theta_bar = " << bounds.theta_bar;
            throw ConfigError(os.str());
        }
        if (i > 0 && h > 0.0) {
            const double rate = (theta - previous).norm() / h;
            if (rate > bounds.zeta1 * (1.0 + 1e-3)) {
                std::ostringstream os;
                os << "finite-difference ||theta'|| = " << rate << " near t=" << t << " exceeds zeta1 = " << bounds.zeta1;
                throw ConfigError(os.str());
            }
        }
        previous = theta;
    }
}

void check_reference(const ReferenceTrajectory& ref, double horizon, int samples) {
    const int count = std::max(samples, 2);
    const double h = horizon / static_cast<double>(count - 1);
    constexpr double slack = 1.0 + 1e-9;
    const double fd_step = 1e-4;
    for (int i = 0; i < count; ++i) {
        const double t = h * static_cast<double>(i);
        const Vec xd = ref.xd.value(t);
        const Vec rate = ref.xd.rate(t);
        if (!xd.allFinite() || !rate.allFinite()) {
            throw ConfigError("reference trajectory is not finite at t=" + std::to_string(t));
        }
        if (xd.norm() > ref.bounds.xd_bar * slack || rate.norm() > ref.bounds.delta1 * slack ||
            ref.xd.accel(t).norm() > ref.bounds.delta2 * slack) {
            throw ConfigError("reference trajectory exceeds its declared bounds at t=" + std::to_string(t));
        }
        const Vec central = (ref.xd.value(t + fd_step) - ref.xd.value(t - fd_step)) / (2.0 * fd_step);
        // O(h^2) truncation plus rounding
        const double tol = 1e-6 * (1.0 + ref.bounds.delta2 + rate.norm());
        if ((central - rate).norm() > tol) {
            throw ConfigError("x_d' disagrees with the central difference of x_d at t=" + std::to_string(t));
        }
    }
}

} // namespace tvrise
