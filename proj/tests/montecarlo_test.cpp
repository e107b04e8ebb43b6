#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dualscale/montecarlo.hpp"
#include "dualscale/optimizer.hpp"

using namespace dualscale;

namespace {

const SystemModel& default_model() {
  static const SystemModel m(default_scenario());
  return m;
}

McSetup default_setup() { return mc_setup(default_model(), 4 * default_model().timing().block_time()); }

// Two users with no sensing error, a near-noiseless pilot and no aging.
McSetup perfect_csi_setup() {
  McSetup s;
  s.pilot = PilotConfig{9, 40.0, 1e-9};
  s.comm_noise = 1.0;
  for (double theta : {-0.5, 0.6}) {
    McUser u;
    u.spatial = spatial_correlation({theta, std::numbers::pi / 180, 1.0}, 8);
    u.beta = 1.0;
    u.r_hat = u.spatial.matrix;
    u.sensing_error = HermitianMatrix::zero(8);
    u.power = 40.0;
    u.rho_override = 1.0;
    s.users.push_back(u);
  }
  return s;
}

}  // namespace

TEST(MonteCarlo, TermsMatchClosedForm) {
  const auto reps = simulate_sinr_batch(default_setup(), {{0, 1}, {2, 4}, {4, 5}}, 200000, RngStream(3, 0));
  for (const McReport& r : reps) {
    EXPECT_LE(r.signal_error, 0.02) << r.user << " " << r.n;
    EXPECT_LE(r.gain_variance_error, 0.05) << r.user << " " << r.n;
    EXPECT_LE(r.interference_error, 0.05) << r.user << " " << r.n;
    EXPECT_LE(r.sinr_error, kMcTolerance) << r.user << " " << r.n;
    EXPECT_LE(std::abs(r.signal_empirical.imag()), 0.02 * r.signal_analytical);
  }
}

TEST(MonteCarlo, PerfectCsiLimit) {
  const McSetup s = perfect_csi_setup();
  const McReport r = simulate_sinr(s, 0, 3, 50000, RngStream(4, 0));
  EXPECT_NEAR(r.signal_analytical, 1.0, 1e-6);
  EXPECT_LE(r.signal_error, 0.02);
  EXPECT_LE(r.sinr_error, 0.02);
}

TEST(MonteCarlo, NoiseScalingConsistent) {
  McSetup s = default_setup();
  s.comm_noise *= 100.0;
  const McReport loud = simulate_sinr(s, 1, 2, 50000, RngStream(5, 0));
  const McReport base = simulate_sinr(default_setup(), 1, 2, 50000, RngStream(5, 0));
  EXPECT_LT(loud.sinr_analytical, base.sinr_analytical);
  EXPECT_LE(loud.sinr_error, kMcTolerance);
  const double empirical_ratio = loud.sinr_empirical / base.sinr_empirical;
  const double analytical_ratio = loud.sinr_analytical / base.sinr_analytical;
  EXPECT_NEAR(empirical_ratio / analytical_ratio, 1.0, 0.05);
}

TEST(MonteCarlo, NoTemporalCorrelationKillsSinr) {
  McSetup s = default_setup();
  for (auto& u : s.users) u.rho_override = 0.0;
  const McReport r = simulate_sinr(s, 2, 1, 20000, RngStream(6, 0));
  EXPECT_EQ(r.sinr_analytical, 0.0);
  EXPECT_LE(r.sinr_empirical, 1e-3);
}

TEST(MonteCarlo, SampleFloorAndArguments) {
  EXPECT_THROW(simulate_sinr(default_setup(), 0, 1, kMinMcSamples - 1, RngStream(1, 0)), ArgumentError);
  EXPECT_THROW(simulate_sinr(default_setup(), 9, 1, kMinMcSamples, RngStream(1, 0)), ArgumentError);
  EXPECT_THROW(simulate_sinr(default_setup(), 0, 0, kMinMcSamples, RngStream(1, 0)), ArgumentError);
}

TEST(MonteCarlo, ThreadInvariant) {
  const auto a = simulate_sinr_batch(default_setup(), {{0, 1}, {3, 2}}, 30000, RngStream(7, 0), 1);
  const auto b = simulate_sinr_batch(default_setup(), {{0, 1}, {3, 2}}, 30000, RngStream(7, 0), 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].signal_empirical, b[i].signal_empirical);
    EXPECT_EQ(a[i].sinr_empirical, b[i].sinr_empirical);
    EXPECT_EQ(a[i].interference_empirical, b[i].interference_empirical);
  }
}

TEST(MonteCarlo, ErrorShrinksLikeInverseRootSamples) {
  // RMS gain-variance error over independent seeds at N and 4N draws.
  const McSetup s = default_setup();
  const auto rms = [&](std::size_t n) {
    double acc = 0.0;
    const int seeds = 24;
    for (int seed = 0; seed < seeds; ++seed) {
      const McReport r = simulate_sinr(s, 0, 1, n, RngStream(100 + seed, n));
      acc += r.gain_variance_error * r.gain_variance_error;
    }
    return std::sqrt(acc / seeds);
  };
  const double ratio = rms(40000) / rms(10000);
  EXPECT_NEAR(ratio, 0.5, 0.5 * 0.3);
}

TEST(SinrCheck, IndexSet) {
  const FramePlan plan{4, 0.0, allocate_blocks(31, 7)};
  EXPECT_EQ(proposition1_indices(plan), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  const FramePlan single{4, 0.0, {31}};
  EXPECT_EQ(proposition1_indices(single), (std::vector<std::size_t>{1, 16, 31}));
}

TEST(DeltaMethod, SmallCrbWithinTenPercent) {
  RngStream rng(8, 0);
  const UserGeometry g{0.3, std::numbers::pi / 180, 1.0};
  const DeltaMethodReport r = verify_delta_method(g, 8, 1e-6, 100000, rng);
  EXPECT_LE(r.relative_error, 0.10);
  EXPECT_FALSE(r.outside_linear_regime);
}

TEST(DeltaMethod, ZeroAndLargeCrb) {
  RngStream rng(9, 0);
  const UserGeometry g{-0.2, std::numbers::pi / 180, 2.0};
  const DeltaMethodReport zero = verify_delta_method(g, 8, 0.0, 100, rng);
  EXPECT_EQ(zero.empirical.norm(), 0.0);
  EXPECT_EQ(zero.analytical.norm(), 0.0);
  const DeltaMethodReport big = verify_delta_method(g, 8, 1e-2, 1000, rng);
  EXPECT_TRUE(big.outside_linear_regime);
  EXPECT_THROW(verify_delta_method(g, 8, -1.0, 100, rng), ArgumentError);
}
