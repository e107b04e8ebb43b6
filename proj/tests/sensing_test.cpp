#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dualscale/sensing.hpp"

using namespace dualscale;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Slepian-Bangs Fisher information per unit sensing time for the noiseless
// echo mu = alpha_dot b(theta) a(theta)^T w, w = conj(a(theta0)), with
// eta = (theta, Re alpha_dot, Im alpha_dot). Returns [FIM^-1]_00.
double fim_oracle_crb(const SensingScene& scene, double theta0, std::size_t lt) {
  const double amp = std::sqrt(scene.gain * scene.rx_antennas * lt) * std::abs(scene.alpha);
  const cd alpha_dot = amp * scene.alpha / std::abs(scene.alpha);
  const CVector w = steering_tx(theta0, lt).conjugate();
  const auto mu = [&](double th, cd ad) -> CVector {
    const cd gain = steering_tx(th, lt).transpose() * w;
    return ad * gain * steering_tx(th, scene.rx_antennas);
  };
  const double h = 1e-6;
  CVector d[3];
  d[0] = (mu(theta0 + h, alpha_dot) - mu(theta0 - h, alpha_dot)) / (2 * h);
  d[1] = mu(theta0, 1.0);
  d[2] = mu(theta0, cd(0.0, 1.0));
  Eigen::Matrix3d fim;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) fim(i, j) = 2.0 / scene.noise * (d[i].adjoint() * d[j])(0).real();
  return fim.inverse()(0, 0);
}

SensingUser make_user(double theta_deg, double sigma_r2, double gamma) {
  const UserGeometry g{theta_deg * kDeg, 1 * kDeg, 1.0};
  const SensingScene scene{cd(1, 0), 1e3, 8, sigma_r2};
  return SensingUser{crb_coefficient(scene, g.theta, 8), g.beta, spatial_correlation(g, 8),
                     error_direction(g.theta, g.beta, 8), gamma};
}

}  // namespace

TEST(Crb, MatchesFisherOracle) {
  for (double deg : {0.0, 20.0, 45.0, -63.0}) {
    const SensingScene scene{std::polar(0.7, 0.4), 1e3, 8, 0.3};
    const double c = crb_coefficient(scene, deg * kDeg, 8).coefficient;
    EXPECT_NEAR(c / fim_oracle_crb(scene, deg * kDeg, 8), 1.0, 1e-6) << deg;
  }
  const SensingScene asym{cd(1, 0), 10.0, 4, 1.0};
  const double c = crb_coefficient(asym, 0.5, 6).coefficient;
  EXPECT_NEAR(c / fim_oracle_crb(asym, 0.5, 6), 1.0, 1e-6);
}

TEST(Crb, ScalingLaws) {
  const SensingScene s1{cd(1, 0), 1e3, 8, 1.0};
  SensingScene s2 = s1;
  s2.alpha = cd(std::sqrt(2.0), 0);
  const double c1 = crb_coefficient(s1, 0.3, 8).coefficient;
  EXPECT_DOUBLE_EQ(crb_coefficient(s2, 0.3, 8).coefficient, c1 / 2);
  SensingScene s3 = s1;
  s3.alpha = std::polar(1.0, 2.1);
  EXPECT_NEAR(crb_coefficient(s3, 0.3, 8).coefficient, c1, 1e-14 * c1);
  const CrbModel m = crb_coefficient(s1, 0.3, 8);
  // c / (a t) * a rounds twice; the identity holds to within two ulps.
  for (double a : {2.0, 10.0, 0.5}) EXPECT_NEAR(m.crb(a * 1e-4) * a, m.crb(1e-4), 4.5e-16 * m.crb(1e-4));
}

TEST(Crb, DegenerateGeometry) {
  const SensingScene s{cd(1, 0), 1e3, 8, 1.0};
  EXPECT_THROW(crb_coefficient(s, std::numbers::pi / 2, 8), DegenerateGeometryError);
  SensingScene single = s;
  single.rx_antennas = 1;
  EXPECT_THROW(crb_coefficient(single, 0.2, 1), DegenerateGeometryError);
  SensingScene bad = s;
  bad.noise = 0.0;
  EXPECT_THROW(crb_coefficient(bad, 0.2, 8), ArgumentError);
}

TEST(SensingError, Structure) {
  const HermitianMatrix dir = error_direction(0.4, 1.3, 8);
  EXPECT_EQ(sensing_error_covariance(dir, 0.0).frobenius_norm(), 0.0);
  const HermitianMatrix r = sensing_error_covariance(dir, 2e-5);
  const auto ev = r.eigenvalues();
  EXPECT_LE(ev(ev.size() - 2), 1e-12 * r.trace());
  EXPECT_NEAR(r.trace(), 2e-5 * 1.3 * steering_derivative(0.4, 8).squaredNorm(), 1e-18);
  EXPECT_THROW(sensing_error_covariance(dir, -1.0), ArgumentError);
}

TEST(EffectiveCorrelation, Basics) {
  const SpatialCorrelation sp = spatial_correlation({0.3, 1 * kDeg, 1.0}, 8);
  const HermitianMatrix zero = HermitianMatrix::zero(8);
  EXPECT_LE((effective_correlation(2.0, sp, zero).matrix() - (sp.matrix * 2.0).matrix()).cwiseAbs().maxCoeff(), 1e-14);
  const HermitianMatrix rr = sensing_error_covariance(error_direction(0.3, 2.0, 8), 1e-7);
  EXPECT_NEAR(effective_correlation(2.0, sp, rr).trace(), 2.0 - rr.trace(), 1e-10);
  const HermitianMatrix coarse = sensing_error_covariance(error_direction(0.3, 2.0, 8), 1e-2);
  EXPECT_THROW(effective_correlation(2.0, sp, coarse), SensingTooCoarse);
}

TEST(MinSensingTime, AccuracyBoundOnly) {
  SensingUser u;
  u.crb.coefficient = 1.0;
  u.beta = 1.0;
  u.spatial = SpatialCorrelation{HermitianMatrix::identity(2) * 0.5};
  u.direction = HermitianMatrix::zero(2);
  u.max_crb = 0.5;
  EXPECT_DOUBLE_EQ(min_sensing_time({u}, 10.0).min_time, 2.0);
  EXPECT_THROW(min_sensing_time({u}, 1.0), InfeasibleSensing);
  u.max_crb = 0.0;
  EXPECT_THROW(min_sensing_time({u}, 10.0), ArgumentError);
}

TEST(MinSensingTime, PsdBoundBindsForLooseGamma) {
  const SensingUser u = make_user(40.0, 0.02, 1e9);
  const SensingRequirement req = sensing_requirement({u});
  EXPECT_EQ(req.min_time, req.psd_time[0]);
  EXPECT_GT(req.psd_time[0], req.accuracy_time[0]);
}

TEST(MinSensingTime, PsdThresholdBracketed) {
  for (double deg : {-60.0, 0.0, 30.0}) {
    const SensingUser u = make_user(deg, 0.02, 0.5);
    const double t = psd_sensing_time(u);
    EXPECT_GE(effective_min_eigenvalue(u, t), -kPsdTolerance);
    EXPECT_LT(effective_min_eigenvalue(u, t * (1 - 1e-5)), -kPsdTolerance);
    EXPECT_NO_THROW(effective_correlation(u.beta, u.spatial, sensing_error_covariance(u.direction, u.crb.crb(t))));
  }
}

TEST(MinSensingTime, MonotoneInGammaAndTime) {
  double prev = INFINITY;
  for (double g : {1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
    const double t = sensing_requirement({make_user(-30, 0.02, g), make_user(10, 0.02, g)}).min_time;
    EXPECT_LE(t, prev);
    prev = t;
  }
  const SensingUser u = make_user(25.0, 0.02, 0.5);
  double last = -INFINITY;
  for (double t = 1e-6; t < 1e-3; t *= 1.5) {
    const double ev = effective_min_eigenvalue(u, t);
    EXPECT_GE(ev, last - 1e-15);
    last = ev;
  }
}
