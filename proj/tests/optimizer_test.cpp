#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dualscale/optimizer.hpp"

using namespace dualscale;

namespace {

const SystemModel& default_model() {
  static const SystemModel m(default_scenario());
  return m;
}

double prefix_objective(const std::vector<std::size_t>& parts, const std::vector<double>& phi) {
  double s = 0.0;
  for (std::size_t nm : parts)
    for (std::size_t n = 0; n < nm; ++n) s += phi[n];
  return s;
}

}  // namespace

TEST(AllocateBlocks, Examples) {
  EXPECT_EQ(allocate_blocks(10, 3), (std::vector<std::size_t>{4, 3, 3}));
  EXPECT_EQ(allocate_blocks(7, 7), std::vector<std::size_t>(7, 1));
  EXPECT_EQ(allocate_blocks(9, 1), (std::vector<std::size_t>{9}));
  EXPECT_THROW(allocate_blocks(3, 4), ArgumentError);
  EXPECT_THROW(allocate_blocks(3, 0), ArgumentError);
}

TEST(AllocateBlocks, OptimalForStrictlyDecreasingProfiles) {
  // Any strictly decreasing profile: the balanced partition maximizes the
  // sum of prefix sums over all compositions.
  RngStream rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> phi(12);
    double v = 10.0;
    for (double& p : phi) {
      p = v;
      v -= 0.01 + rng.uniform();
    }
    for (std::size_t nt = 1; nt <= 12; ++nt)
      for (std::size_t m = 1; m <= nt; ++m) {
        const double mine = prefix_objective(allocate_blocks(nt, m), phi);
        for (const auto& c : enumerate_compositions(nt, m)) EXPECT_GE(mine, prefix_objective(c, phi) - 1e-12);
      }
  }
}

TEST(Compositions, CountsAndSums) {
  for (std::size_t n = 1; n <= 10; ++n) {
    std::size_t total = 0;
    for (std::size_t m = 1; m <= n; ++m) {
      const auto cs = enumerate_compositions(n, m);
      for (const auto& c : cs) {
        EXPECT_EQ(c.size(), m);
        EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), n);
      }
      total += cs.size();
    }
    EXPECT_EQ(total, std::size_t{1} << (n - 1));
  }
}

TEST(RandomComposition, ValidAndReproducible) {
  for (std::size_t m = 1; m <= 9; ++m) {
    RngStream a(5, m), b(5, m);
    const auto c = random_composition(9, m, a);
    EXPECT_EQ(c, random_composition(9, m, b));
    EXPECT_EQ(c.size(), m);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), 9u);
    for (std::size_t x : c) EXPECT_GE(x, 1u);
  }
}

TEST(OptimizeInner, SegmentEndpoints) {
  RateEvaluator eval(default_model());
  const double tb = eval.timing().block_time();
  const double t_min = default_model().min_sensing_time();
  const auto first = optimize_inner(eval, 3, 7);
  ASSERT_TRUE(first.has_value());
  EXPECT_GE(3 * tb + first->partial_time, t_min);
  // The rate falls with extra sensing here, so the lower feasible end wins.
  EXPECT_NEAR(first->partial_time, t_min - 3 * tb, 1e-9 * tb);
  const auto inner = optimize_inner(eval, 8, 5);
  ASSERT_TRUE(inner.has_value());
  EXPECT_EQ(inner->partial_time, 0.0);
  EXPECT_FALSE(optimize_inner(eval, 2, 7).has_value());
  EXPECT_THROW(optimize_inner(eval, 30, 6), ArgumentError);
}

TEST(OptimizeInner, WithinDenseGrid) {
  RateEvaluator eval(default_model());
  const std::size_t n = eval.timing().blocks;
  for (std::size_t h : {3u, 5u, 20u})
    for (std::size_t m : {1u, 4u, 9u}) {
      const auto r = optimize_inner(eval, h, m);
      ASSERT_TRUE(r.has_value());
      const auto range = segment_range(default_model(), h);
      double grid = -INFINITY;
      for (int i = 0; i < 1000; ++i) {
        const double x = range->lo + (range->hi - range->lo) * i / 999.0;
        grid = std::max(grid, eval.rate(FramePlan{h, x, allocate_blocks(n - h, m)}));
      }
      EXPECT_GE(r->rate, grid * (1 - 1e-4));
    }
}

TEST(Optimize, TraceCountAndConsistency) {
  RateEvaluator eval(default_model());
  const SearchResult r = optimize(eval);
  const std::size_t n = eval.timing().blocks;
  std::size_t expected = 0;
  for (std::size_t h = default_model().first_sensing_block(); h < n; ++h) expected += n - h;
  EXPECT_EQ(r.trace.size(), expected);
  EXPECT_EQ(r.rate, default_model().rate(r.plan).total_rate);
  for (const auto& tp : r.trace)
    if (tp.feasible) {
      EXPECT_LE(tp.rate, r.rate);
    }
}

TEST(Optimize, DeterministicAcrossThreads) {
  RateEvaluator e1(default_model()), e2(default_model());
  const SearchResult a = optimize(e1, {1});
  const SearchResult b = optimize(e2, {4});
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.rate, b.rate);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].rate, b.trace[i].rate);
    EXPECT_EQ(a.trace[i].partial_time, b.trace[i].partial_time);
  }
}

TEST(Optimize, InfeasibleSensing) {
  Scenario s = default_scenario();
  s.gamma = {1e-9};
  const SystemModel m(s);
  RateEvaluator eval(m);
  EXPECT_THROW(optimize(eval), InfeasibleSensing);
}

TEST(Optimize, RelaxingGammaNeverHurts) {
  double prev = -INFINITY;
  for (double g : {1e-5, 3e-5, 1e-4, 0.5}) {
    Scenario s = default_scenario();
    s.gamma = {g};
    const SystemModel m(s);
    const double r = optimize(m).rate;
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(Baselines, StructureAndDominance) {
  RateEvaluator eval(default_model());
  const SearchResult best = optimize(eval);
  const RngStream rng(1, 0);
  const BaselineResult ssu = baseline(eval, BaselineKind::kSsu, rng);
  const BaselineResult fsu = baseline(eval, BaselineKind::kFsu, rng);
  const BaselineResult rba = baseline(eval, BaselineKind::kRba, rng);
  EXPECT_EQ(ssu.search.plan.updates(), 1u);
  for (std::size_t nm : fsu.search.plan.blocks) EXPECT_EQ(nm, 1u);
  EXPECT_EQ(rba.draw_rates.size(), kRbaDraws);
  for (const auto* b : {&ssu, &fsu, &rba}) EXPECT_LE(b->rate, best.rate);
  for (double d : rba.draw_rates) EXPECT_LE(d, best.rate * (1 + 1e-12));
  const BaselineResult again = baseline(eval, BaselineKind::kRba, rng, {3});
  EXPECT_EQ(again.draw_rates, rba.draw_rates);
}

TEST(BruteForce, MatchesOptimize) {
  RateEvaluator eval(default_model());
  const SearchResult o = optimize(eval);
  const SearchResult b = brute_force(eval, 200);
  EXPECT_GE(o.rate, b.rate * (1 - 1e-4));
  EXPECT_LE(std::abs(o.rate - b.rate), 1e-4 * b.rate);
}

TEST(BruteForce, Limits) {
  Scenario big = default_scenario();
  big.blocks = 41;
  const SystemModel mb(big);
  RateEvaluator eb(mb);
  EXPECT_THROW(brute_force(eb, 10), RefusalError);
  RateEvaluator eval(default_model());
  EXPECT_THROW(brute_force(eval, 10, PartitionMode::kAllCompositions), RefusalError);
  EXPECT_THROW(best_composition(eval, 4, 0.0, 3), RefusalError);
}

TEST(BruteForce, FullCompositionModeOnShortFrame) {
  Scenario s = default_scenario();
  s.blocks = 13;
  const SystemModel m(s);
  RateEvaluator eval(m);
  const SearchResult full = brute_force(eval, 20, PartitionMode::kAllCompositions);
  const SearchResult bal = brute_force(eval, 20);
  EXPECT_NEAR(full.rate, bal.rate, 1e-15);
  const CompositionBest c = best_composition(eval, 3, 0.6 * eval.timing().block_time(), 3);
  EXPECT_EQ(c.rate, eval.rate(FramePlan{3, 0.6 * eval.timing().block_time(), allocate_blocks(10, 3)}));
  std::vector<std::size_t> sorted = c.blocks;
  std::sort(sorted.rbegin(), sorted.rend());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{4, 3, 3}));
}

TEST(BruteForce, SingleBlockFrameIsInfeasible) {
  Scenario s = default_scenario();
  s.blocks = 1;
  const SystemModel m(s);
  RateEvaluator eval(m);
  EXPECT_THROW(brute_force(eval, 10), InfeasibleSensing);
}

TEST(Concavity, DefaultScenarioSegmentsConcave) {
  RateEvaluator eval(default_model());
  EXPECT_LE(segment_concavity(eval).max_second_difference, 1e-9);
}
