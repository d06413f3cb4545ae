#include "tvrise/analysis.hpp"

#include "tvrise/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace tvrise {

namespace {

double bound_horizon(const Scenario& s) { return std::max(s.horizon.t_end, 10.0); }

double lambda_min_gamma2(const GainSet& gains, int n) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(gains.gamma2_block(n), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

double update_rate_bound(const GainSet& gains, int n, double Yd_bar) {
    return gains.beta * spectral_norm(gains.Gamma) * Yd_bar / lambda_min_gamma2(gains, n);
}

BoundReport estimate_NB_bounds(const Scenario& s, int grid) {
    const int n = s.model.n;
    const double horizon = bound_horizon(s);
    const double theta_bar = s.gains.theta_bar;
    const double rate_step = s.horizon.dt / 100.0;
    const double accel_step = 1e-4;

    BoundReport report;
    report.Yd_bar = estimate_Yd_bar(s.model, s.reference, horizon, s.horizon.dt / 10.0);
    report.inverse_norm_bound = 1.0 / lambda_min_gamma2(s.gains, n);
    const double gamma3_per_beta = spectral_norm(s.gains.Gamma) * report.Yd_bar * report.inverse_norm_bound;
    report.gamma3 = s.gains.beta * gamma3_per_beta;

    double sup_nb = 0.0;
    double sup_static = 0.0;
    double sup_per_beta = 0.0;
    const int count = std::max(grid, 2);
    for (int i = 0; i < count; ++i) {
        const double t = horizon * static_cast<double>(i) / static_cast<double>(count - 1);
        const Mat Yd = eval_Yd(s.model, s.reference, t).matrix();
        const Mat Yd_rate = eval_Yd_rate(s.model, s.reference, t, rate_step);
        const Mat Yd_accel = eval_Yd_accel(s.model, s.reference, t, accel_step);
        const Vec theta = eval_theta(s.model, t);
        const Vec theta_dot = eval_theta_dot(s.model, t);
        const Vec theta_ddot = eval_theta_ddot(s.model, t);
        const double rate_norm = spectral_norm(Yd_rate);

        // N_B = g(t) - Y_d' theta_hat with g = Y_d theta' + Y_d' theta.
        const Vec g = Yd * theta_dot + Yd_rate * theta;
        sup_nb = std::max(sup_nb, g.norm() + rate_norm * theta_bar);

        // N_B' = g' - Y_d'' theta_hat - Y_d' theta_hat'.
        const Vec g_dot = 2.0 * Yd_rate * theta_dot + Yd * theta_ddot + Yd_accel * theta;
        sup_static = std::max(sup_static, g_dot.norm() + spectral_norm(Yd_accel) * theta_bar);
        sup_per_beta = std::max(sup_per_beta, rate_norm * gamma3_per_beta);
    }
    report.gamma1 = kBoundSafety * sup_nb;
    report.gamma2_static = kBoundSafety * sup_static;
    report.gamma2_per_beta = kBoundSafety * sup_per_beta;
    report.gamma2 = report.gamma2_static + report.gamma2_per_beta * s.gains.beta;

    const double alpha = s.gains.alpha;
    report.beta_required = report.gamma1 + report.gamma2 / alpha;
    report.gain_condition_met = s.gains.beta > report.beta_required;
    const double slope = 1.0 - report.gamma2_per_beta / alpha;
    report.beta_minimal = slope > 0.0 ? (report.gamma1 + report.gamma2_static / alpha) / slope
                                      : std::numeric_limits<double>::infinity();
    return report;
}

GainCheck check_gain_condition(const GainSet& gains, const BoundReport& report) {
    const double gamma2 = report.gamma2_static + report.gamma2_per_beta * gains.beta;
    const double required = report.gamma1 + gamma2 / gains.alpha;
    return {gains.beta > required, gains.beta - required};
}

double minimal_compliant_beta(const Scenario& scenario, int grid) {
    return estimate_NB_bounds(scenario, grid).beta_minimal;
}

InverseBoundResult inverse_bound_check(const AugmentedRegressor& Yd, const Mat& Gamma) {
    const Mat& Y = Yd.matrix();
    if (Gamma.rows() != Y.cols() || Gamma.cols() != Y.cols()) {
        throw InputError("inverse_bound_check: Gamma does not match the regressor width");
    }
    const Mat gram = Y * Gamma * Y.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (gram + gram.transpose()), Eigen::EigenvaluesOnly);
    const double lambda_min = eig.eigenvalues().minCoeff();
    if (!(lambda_min > 0.0)) {
        throw InvariantError("Y Gamma Y^T is not positive-definite (lambda_min = " + fmt(lambda_min) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig2(Gamma.bottomRightCorner(Yd.n(), Yd.n()), Eigen::EigenvaluesOnly);
    InverseBoundResult out;
    out.inverse_norm = 1.0 / lambda_min;
    out.bound = 1.0 / eig2.eigenvalues().minCoeff();
    out.pass = out.inverse_norm <= out.bound + 1e-9;
    return out;
}

InverseBoundSweep inverse_bound_randomized(std::uint64_t seed, int draws, double slack) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 4);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> spread(0.05, 5.0);
    const auto random_spd = [&](int size) {
        const Mat q = Mat::NullaryExpr(size, size, [&]() { return normal(rng); }).householderQr().householderQ();
        Vec lambda(size);
        for (int i = 0; i < size; ++i) {
            lambda(i) = spread(rng);
        }
        const Mat out = q * lambda.asDiagonal() * q.transpose();
        return Mat(0.5 * (out + out.transpose()));
    };

    InverseBoundSweep out;
    out.worst_ratio = 0.0;
    for (int d = 0; d < draws; ++d) {
        const int n = dim(rng);
        const int m = dim(rng);
        const Mat yh = Mat::NullaryExpr(n, m, [&]() { return 3.0 * normal(rng); });
        const Mat Gamma = GainSet::block_gamma(random_spd(m), random_spd(n));
        const InverseBoundResult r = inverse_bound_check(AugmentedRegressor(yh), Gamma);
        out.worst_ratio = std::max(out.worst_ratio, r.inverse_norm / r.bound);
        out.failures += r.inverse_norm <= r.bound * (1.0 + slack) ? 0 : 1;
        ++out.draws;
    }

    // Y_h = 0 makes Y Gamma Y^T = Gamma2, where the bound is attained exactly.
    const Mat gamma2 = random_spd(3);
    const InverseBoundResult tight = inverse_bound_check(AugmentedRegressor(Mat::Zero(3, 2)),
                                            GainSet::block_gamma(random_spd(2), gamma2));
    out.tight_gap = std::abs(tight.inverse_norm - tight.bound);
    out.pass = out.failures == 0 && out.tight_gap <= 1e-12 * std::max(1.0, tight.bound);
    return out;
}

UpdateRateResult update_rate_check(const TrajectoryRecord& record, const GainSet& gains, double Yd_bar) {
    UpdateRateResult out;
    out.gamma3 = update_rate_bound(gains, record.n, Yd_bar);
    for (std::size_t k = 0; k + 1 < record.samples.size(); ++k) {
        const double rate =
            (record.samples[k + 1].theta_hat - record.samples[k].theta_hat).norm() / record.dt;
        if (rate > out.sup_rate) {
            out.sup_rate = rate;
            out.worst_index = k;
        }
    }
    out.pass = out.sup_rate <= out.gamma3 * (1.0 + 1e-3);
    return out;
}

LyapunovReport lyapunov_report(const TrajectoryRecord& record, const GainSet& gains) {
    LyapunovReport out;
    const auto& samples = record.samples;
    out.lambda3 = std::min(gains.alpha, gains.K - 0.5);
    out.lambda3_positive = out.lambda3 > 0.0;
    if (samples.empty()) {
        return out;
    }
    out.min_P = samples.front().P;
    out.max_VL_increase = -std::numeric_limits<double>::infinity();
    double num = 0.0;
    double den = 0.0;
    out.c_certified = std::numeric_limits<double>::infinity();
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const Sample& s = samples[k];
        out.min_P = std::min(out.min_P, s.P);
        const double z_sq = s.r.squaredNorm() + s.e.squaredNorm();
        if (z_sq > 0.0) {
            const double l = std::log(z_sq);
            st += s.t;
            sl += l;
            stt += s.t * s.t;
            stl += s.t * l;
            ++count;
        }
        if (k + 1 == samples.size()) {
            break;
        }
        const double dV = samples[k + 1].V_L - s.V_L;
        if (dV > out.max_VL_increase) {
            out.max_VL_increase = dV;
            out.worst_step = k;
        }
        const double decay = -dV / record.dt;
        num += decay * z_sq;
        den += z_sq * z_sq;
        if (z_sq > 0.0) {
            out.c_certified = std::min(out.c_certified, (kLyapunovStepTolerance - dV) / (z_sq * record.dt));
        }
    }
    if (samples.size() < 2) {
        out.max_VL_increase = 0.0;
        out.c_certified = 0.0;
    }
    out.monotone = out.max_VL_increase <= kLyapunovStepTolerance;
    out.c_fit = den > 0.0 ? num / den : 0.0;
    out.decay_inequality_holds = out.c_certified > 0.0 && std::isfinite(out.c_certified);
    if (count > 1) {
        const double c = static_cast<double>(count);
        const double var = stt - st * st / c;
        out.z_decay_rate = var > 0.0 ? -(stl - st * sl / c) / var : 0.0;
    }
    out.P_nonnegative = out.min_P >= -kCertificateTolerance;
    return out;
}

ProjectionReport projection_report(const TrajectoryRecord& record, double theta_bar) {
    ProjectionReport out;
    out.max_tangency = -std::numeric_limits<double>::infinity();
    for (const Sample& s : record.samples) {
        out.max_norm = std::max(out.max_norm, s.theta_hat.norm());
        if (s.branch == Branch::Boundary) {
            ++out.boundary_samples;
            out.max_tangency = std::max(out.max_tangency, boundary_gradient(s.theta_hat).dot(s.theta_hat_dot));
        }
    }
    out.ball_ok = out.max_norm <= theta_bar + 1e-6;
    out.tangency_ok = out.boundary_samples == 0 || out.max_tangency <= 1e-9;
    return out;
}

double identity_residual(const TrajectoryRecord& record, const Scenario& scenario) {
    double sup = 0.0;
    for (const Sample& s : record.samples) {
        const Mat Y = eval_Y(scenario.model, s.x, s.t).matrix();
        const Mat Yd = eval_Yd(scenario.model, scenario.reference, s.t).matrix();
        const Vec rhs = (Y - Yd) * s.theta + Yd * s.theta_tilde + s.mu;
        sup = std::max(sup, (s.r - rhs).norm());
    }
    return sup;
}

namespace {

struct RecordDerivatives {
    Mat Y;
    Mat Yd;
    Mat Y_rate;
    Mat Yd_rate;
};

RecordDerivatives derivatives_at(const TrajectoryRecord& record, const Scenario& scenario, std::size_t k) {
    const auto& prev = record.samples[k - 1];
    const auto& cur = record.samples[k];
    const auto& next = record.samples[k + 1];
    const double span = next.t - prev.t;
    RecordDerivatives d;
    d.Y = eval_Y(scenario.model, cur.x, cur.t).matrix();
    d.Yd = eval_Yd(scenario.model, scenario.reference, cur.t).matrix();
    d.Y_rate = (eval_Y(scenario.model, next.x, next.t).matrix() - eval_Y(scenario.model, prev.x, prev.t).matrix()) /
               span;
    d.Yd_rate = (eval_Yd(scenario.model, scenario.reference, next.t).matrix() -
                 eval_Yd(scenario.model, scenario.reference, prev.t).matrix()) /
                span;
    return d;
}

} // namespace

NtildeReport ntilde_report(const TrajectoryRecord& record, const Scenario& scenario, double z_floor) {
    NtildeReport out;
    out.z_floor = z_floor;
    for (std::size_t k = 1; k + 1 < record.samples.size(); ++k) {
        const Sample& s = record.samples[k];
        const RecordDerivatives d = derivatives_at(record, scenario, k);
        const Vec ntilde =
            (d.Y_rate - d.Yd_rate) * s.theta + (d.Y - d.Yd) * eval_theta_dot(scenario.model, s.t) + s.e;
        const double z = std::sqrt(s.r.squaredNorm() + s.e.squaredNorm());
        if (z > z_floor) {
            out.rho_hat = std::max(out.rho_hat, ntilde.norm() / z);
        } else {
            out.max_at_small_z = std::max(out.max_at_small_z, ntilde.norm());
        }
    }
    const double lambda3 = std::min(scenario.gains.alpha, scenario.gains.K - 0.5);
    out.region_certificate = lambda3 >= 0.5 * out.rho_hat * out.rho_hat;
    return out;
}

RdotResidual closed_loop_r_dot_check(const TrajectoryRecord& record, const Scenario& scenario, double t_from) {
    RdotResidual out;
    const auto& samples = record.samples;
    out.residual.assign(samples.size(), std::numeric_limits<double>::quiet_NaN());
    const GainSet& g = scenario.gains;
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
        const Sample& s = samples[k];
        if (s.t < t_from || s.switching || samples[k + 1].switching) {
            continue;
        }
        // The selection must be constant over the step and no zero crossing may
        // have been resolved inside it.
        const Vec& sign = s.sign;
        if (samples[k + 1].crossings > 0 || sign != samples[k + 1].sign) {
            continue;
        }
        const RecordDerivatives d = derivatives_at(record, scenario, k);
        const Vec theta_dot = eval_theta_dot(scenario.model, s.t);
        const Vec rhs = (d.Y_rate - d.Yd_rate) * s.theta + (d.Y - d.Yd) * theta_dot + d.Yd_rate * s.theta_tilde +
                        d.Yd * theta_dot - g.beta * sign - g.K * s.r;
        const Vec fd = (samples[k + 1].r - s.r) / (samples[k + 1].t - s.t);
        out.residual[k] = (fd - rhs).norm();
        out.sup = std::max(out.sup, out.residual[k]);
        ++out.admissible;
    }
    return out;
}

RunMetrics run_metrics(const TrajectoryRecord& record, double final_fraction) {
    RunMetrics out;
    const auto& samples = record.samples;
    if (samples.empty()) {
        return out;
    }
    out.min_P = samples.front().P;
    for (const Sample& s : samples) {
        out.sup_x = std::max(out.sup_x, s.x.norm());
        out.sup_u = std::max(out.sup_u, s.u.norm());
        out.sup_theta_hat = std::max(out.sup_theta_hat, s.theta_hat.norm());
        out.sup_mu = std::max(out.sup_mu, s.mu.norm());
        out.sup_r = std::max(out.sup_r, s.r.norm());
        out.sup_P = std::max(out.sup_P, std::abs(s.P));
        out.min_P = std::min(out.min_P, s.P);
        out.switches += s.switching ? 1 : 0;
        out.crossings += static_cast<std::size_t>(s.crossings);
    }
    out.final_error_norm = samples.back().e.norm();
    const auto window = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(final_fraction * static_cast<double>(samples.size()))));
    double sum_sq = 0.0;
    for (std::size_t k = samples.size() - window; k < samples.size(); ++k) {
        const double e = samples[k].e.norm();
        sum_sq += e * e;
        out.final_window_max = std::max(out.final_window_max, e);
    }
    out.final_window_rms = std::sqrt(sum_sq / static_cast<double>(window));
    return out;
}

bool VerificationReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.pass; });
}

bool VerificationReport::certified() const {
    return gain.met && lyapunov.lambda3_positive && lyapunov.P_nonnegative && projection.ball_ok &&
           projection.tangency_ok && update_rate.pass;
}

VerificationReport verify_run(const TrajectoryRecord& record, const Scenario& scenario) {
    VerificationReport v;
    v.bounds = estimate_NB_bounds(scenario);
    v.gain = check_gain_condition(scenario.gains, v.bounds);
    v.lyapunov = lyapunov_report(record, scenario.gains);
    v.projection = projection_report(record, scenario.gains.theta_bar);
    v.update_rate = update_rate_check(record, scenario.gains, v.bounds.Yd_bar);
    v.ntilde = ntilde_report(record, scenario);
    v.identity_residual = identity_residual(record, scenario);

    v.checks.push_back({"gain_condition", v.gain.met,
                        "beta = " + fmt(scenario.gains.beta) + ", required > " +
                            fmt(scenario.gains.beta - v.gain.margin)});
    v.checks.push_back({"lambda3_positive", v.lyapunov.lambda3_positive, "lambda3 = " + fmt(v.lyapunov.lambda3)});
    v.checks.push_back({"P_nonnegative", v.lyapunov.P_nonnegative, "min P = " + fmt(v.lyapunov.min_P)});
    v.checks.push_back({"VL_monotone", v.lyapunov.monotone,
                        "max step increase = " + fmt(v.lyapunov.max_VL_increase) + ", c_fit = " +
                            fmt(v.lyapunov.c_fit)});
    v.checks.push_back({"projection_ball", v.projection.ball_ok,
                        "max ||theta_hat|| = " + fmt(v.projection.max_norm) + ", theta_bar = " +
                            fmt(scenario.gains.theta_bar)});
    v.checks.push_back({"projection_tangency", v.projection.tangency_ok,
                        std::to_string(v.projection.boundary_samples) + " boundary samples"});
    v.checks.push_back({"update_rate", v.update_rate.pass,
                        "sup ||theta_hat'|| = " + fmt(v.update_rate.sup_rate) + ", gamma3 = " +
                            fmt(v.update_rate.gamma3)});
    v.checks.push_back({"closed_loop_identity", v.identity_residual <= 1e-10,
                        "residual = " + fmt(v.identity_residual)});
    return v;
}

} // namespace tvrise
