#include "tvrise/baselines.hpp"
#include "tvrise/error.hpp"

#include <gtest/gtest.h>

using namespace tvrise;

namespace {

BaselineGains gains(double k, double gamma, double sigma, int p) {
    BaselineGains g;
    g.k = k;
    g.gamma = gamma * Mat::Identity(p, p);
    g.sigma = sigma;
    g.a_bar = 1.5;
    g.d_bar = 0.0;
    return g;
}

} // namespace

TEST(Baselines, SigmaModificationHandComputed) {
    const AugmentedRegressor Y(Mat::Constant(1, 1, 2.0));
    const Vec e = Vec::Constant(1, 0.5);
    const Vec th = (Vec(2) << 1.0, -1.0).finished();
    const GradientStep s = sigma_mod_step(e, Y, th, Vec::Constant(1, 0.3), gains(5.0, 10.0, 0.1, 2));
    // u = -5*0.5 - (2*1 + 1*(-1)) + 0.3
    EXPECT_NEAR(s.u(0), -3.2, 1e-15);
    // theta_hat' = 10 * ([2, 1]*0.5 - 0.1*[1, -1])
    EXPECT_NEAR(s.theta_hat_dot(0), 9.0, 1e-14);
    EXPECT_NEAR(s.theta_hat_dot(1), 6.0, 1e-14);
}

TEST(Baselines, ZeroSigmaIsGradientLaw) {
    const AugmentedRegressor Y(Mat::Constant(1, 1, 2.0));
    const Vec th = (Vec(2) << 1.0, -1.0).finished();
    const GradientStep s = sigma_mod_step(Vec::Constant(1, 0.5), Y, th, Vec::Zero(1), gains(5.0, 10.0, 0.0, 2));
    EXPECT_NEAR(s.theta_hat_dot(0), 10.0, 1e-14);
    EXPECT_NEAR(s.theta_hat_dot(1), 5.0, 1e-14);
}

TEST(Baselines, RobustLawReducesToScalarForm) {
    // Y_h = [x], x_d = 0: u = -k x - a_bar x.
    for (double x : {0.8, -0.3}) {
        const AugmentedRegressor Y(Mat::Constant(1, 1, x));
        const Vec u = robust_step(Vec::Constant(1, x), Y, Vec::Zero(1), gains(5.0, 1.0, 0.0, 2));
        EXPECT_NEAR(u(0), -5.0 * x - 1.5 * x, 1e-15);
    }
}

TEST(Baselines, Validation) {
    EXPECT_NO_THROW(gains(5.0, 1.0, 0.1, 2).validate(2));
    EXPECT_THROW(gains(5.0, 1.0, -0.1, 2).validate(2), ConfigError);
    EXPECT_THROW(gains(5.0, 1.0, 0.1, 2).validate(3), ConfigError);
}
