#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dualscale/errors.hpp"
#include "dualscale/optimizer.hpp"
#include "dualscale/scenario.hpp"
#include "dualscale/system.hpp"

namespace dualscale {

/// Rate of (h, T_hat_r, M) with the balanced partition, or NaN when the
/// point is outside the feasible set (T_l < T_l^min or M > N - h).
inline double balanced_rate(RateEvaluator& eval, std::size_t h, double partial_time, std::size_t updates) {
  const std::size_t n = eval.timing().blocks;
  const double t = static_cast<double>(h) * eval.timing().block_time() + partial_time;
  if (h >= n || updates == 0 || updates > n - h || t < eval.model().min_sensing_time())
    return std::numeric_limits<double>::quiet_NaN();
  return eval.rate(FramePlan{h, partial_time, allocate_blocks(n - h, updates)});
}

struct GammaPoint {
  double gamma = 0.0;
  double proposed = 0.0;
  double ssu = 0.0;
  double fsu = 0.0;
  double rba_mean = 0.0;
};

/// Proposed scheduler and the three baselines with every Gamma_k set to gamma.
inline GammaPoint gamma_point(const Scenario& base, double gamma, const SearchOptions& opts = {}) {
  Scenario s = base;
  s.gamma = {gamma};
  const SystemModel model(s);
  RateEvaluator eval(model);
  const RngStream rng(s.seed, 0);
  GammaPoint p;
  p.gamma = gamma;
  p.proposed = optimize(eval, opts).rate;
  p.ssu = baseline(eval, BaselineKind::kSsu, rng, opts).rate;
  p.fsu = baseline(eval, BaselineKind::kFsu, rng, opts).rate;
  p.rba_mean = baseline(eval, BaselineKind::kRba, rng, opts).rate;
  return p;
}

/// Rate against M at a fixed sensing duration h T_b + partial_time.
inline std::vector<double> rate_vs_updates(RateEvaluator& eval, std::size_t h, double partial_time,
                                           const std::vector<std::size_t>& updates) {
  std::vector<double> out;
  for (std::size_t m : updates) out.push_back(balanced_rate(eval, h, partial_time, m));
  return out;
}

/// Rate against whole-block sensing durations T_l = b T_b at fixed M.
inline std::vector<double> rate_vs_sensing_blocks(RateEvaluator& eval, const std::vector<std::size_t>& blocks,
                                                  std::size_t updates) {
  std::vector<double> out;
  for (std::size_t b : blocks) out.push_back(balanced_rate(eval, b, 0.0, updates));
  return out;
}

/// Number of + to - transitions and - to + transitions in the first
/// differences of the finite entries (zero differences are skipped).
struct ShapeSummary {
  std::size_t rises_then_falls = 0;
  std::size_t falls_then_rises = 0;
  std::size_t sign_changes = 0;
};

inline ShapeSummary shape_summary(const std::vector<double>& values) {
  ShapeSummary s;
  int prev_sign = 0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (std::isfinite(prev)) {
      const double d = v - prev;
      const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      if (sign != 0) {
        if (prev_sign == 1 && sign == -1) ++s.rises_then_falls;
        if (prev_sign == -1 && sign == 1) ++s.falls_then_rises;
        if (prev_sign != 0 && sign != prev_sign) ++s.sign_changes;
        prev_sign = sign;
      }
    }
    prev = v;
  }
  return s;
}

/// Increases then decreases: exactly one sign change, from + to -.
inline bool strictly_unimodal(const std::vector<double>& values) {
  const ShapeSummary s = shape_summary(values);
  return s.sign_changes == 1 && s.rises_then_falls == 1;
}

/// No decrease followed by an increase; monotone curves qualify.
inline bool weakly_unimodal(const std::vector<double>& values) { return shape_summary(values).falls_then_rises == 0; }

inline double finite_max(const std::vector<double>& values) {
  double best = -std::numeric_limits<double>::infinity();
  for (double v : values)
    if (std::isfinite(v) && v > best) best = v;
  return best;
}

}  // namespace dualscale
