#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dualscale/errors.hpp"
#include "dualscale/numerics/maximize.hpp"
#include "dualscale/numerics/parallel.hpp"
#include "dualscale/numerics/rng.hpp"
#include "dualscale/rate.hpp"
#include "dualscale/system.hpp"

namespace dualscale {

/// Balanced partition of N_t blocks into M updates: mod(N_t, M) parts of
/// floor(N_t/M) + 1 followed by the rest at floor(N_t/M).
inline std::vector<std::size_t> allocate_blocks(std::size_t total, std::size_t updates) {
  if (updates == 0 || updates > total)
    throw ArgumentError("allocate_blocks: need 1 <= M <= N_t (N_t = " + std::to_string(total) +
                        ", M = " + std::to_string(updates) + ")");
  const std::size_t base = total / updates;
  const std::size_t extra = total % updates;
  std::vector<std::size_t> out(updates, base);
  for (std::size_t m = 0; m < extra; ++m) ++out[m];
  return out;
}

/// Per-user SE rows at one sensing time, se[k][n-1] for n = 1..N.
using SeTable = std::vector<std::vector<double>>;

/// Evaluates subframe rates for a fixed system, caching the SE table per
/// sensing time (keyed by the bit pattern of T_l). Safe to share between
/// threads; cached values do not depend on evaluation order.
class RateEvaluator {
 public:
  explicit RateEvaluator(const SystemModel& model) : model_(model) {}

  const SystemModel& model() const noexcept { return model_; }
  const FrameTiming& timing() const noexcept { return model_.timing(); }

  const SeTable& se_table(double sensing_time) {
    const std::uint64_t key = std::bit_cast<std::uint64_t>(sensing_time);
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const LinkBudget link = model_.link_at(sensing_time);
    const std::size_t n_max = timing().blocks;
    SeTable table(link.size(), std::vector<double>(n_max, 0.0));
    for (std::size_t k = 0; k < link.size(); ++k)
      for (std::size_t n = 1; n <= n_max; ++n) table[k][n - 1] = link.se(k, n);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.try_emplace(key, std::move(table)).first->second;
  }

  double rate(const FramePlan& plan) { return combine_frame_rate(se_table(plan.sensing_time(timing())), plan, timing()); }

  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
  }

 private:
  const SystemModel& model_;
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, SeTable> cache_;
};

/// Feasible range of mod(T_l, T_b) inside segment h. The upper end stays a
/// hair below T_b so that floor(T_l / T_b) = h.
struct SegmentRange {
  double lo = 0.0;
  double hi = 0.0;
};

inline std::optional<SegmentRange> segment_range(const SystemModel& model, std::size_t h) {
  const double tb = model.timing().block_time();
  const double base = static_cast<double>(h) * tb;
  const double t_min = model.min_sensing_time();
  double lo = std::max(0.0, t_min - base);
  while (base + lo < t_min) lo = std::nextafter(lo, tb);  // undo rounding below T_l^min
  const double hi = tb * (1.0 - 1e-9);
  if (lo > hi) return std::nullopt;
  return SegmentRange{lo, hi};
}

struct InnerResult {
  double partial_time = 0.0;  // T_hat_r
  double rate = 0.0;
};

/// Best mod(T_l, T_b) for h sensing blocks and a given partition.
/// Returns nullopt when the segment does not meet T_l^min.
inline std::optional<InnerResult> optimize_inner(RateEvaluator& eval, std::size_t h,
                                                 const std::vector<std::size_t>& blocks) {
  const auto range = segment_range(eval.model(), h);
  if (!range) return std::nullopt;
  FramePlan plan{h, 0.0, blocks};
  const auto objective = [&](double r) {
    plan.partial_time = r;
    return eval.rate(plan);
  };
  const double tol = 1e-9 * eval.timing().block_time();
  const Maximum1d best = maximize_unimodal_1d(objective, range->lo, range->hi, tol);
  return InnerResult{best.argmax, best.value};
}

inline std::optional<InnerResult> optimize_inner(RateEvaluator& eval, std::size_t h, std::size_t updates) {
  const std::size_t n = eval.timing().blocks;
  if (h >= n || updates == 0 || updates > n - h)
    throw ArgumentError("optimize_inner: need 1 <= M <= N - h");
  return optimize_inner(eval, h, allocate_blocks(n - h, updates));
}

struct TracePoint {
  std::size_t sensing_blocks = 0;  // h
  std::size_t updates = 0;         // M
  double partial_time = 0.0;       // best T_hat_r
  double rate = 0.0;
  bool feasible = true;
};

struct SearchResult {
  FramePlan plan;
  double rate = 0.0;
  std::vector<TracePoint> trace;
};

struct SearchOptions {
  std::size_t threads = 1;
};

/// Candidate updates for segment h, and the partition used for (h, M).
struct SearchSpace {
  std::function<std::vector<std::size_t>(std::size_t h)> updates;
  std::function<std::vector<std::size_t>(std::size_t h, std::size_t m)> partition;
};

inline std::vector<std::size_t> all_updates(std::size_t n, std::size_t h) {
  std::vector<std::size_t> out(n - h);
  std::iota(out.begin(), out.end(), std::size_t{1});
  return out;
}

/// Exhaustive outer loop over h in [floor(T_l^min/T_b), N-1] and the
/// candidate M values of each segment, with the inner search per pair.
/// Ties go to smaller h, then smaller M, then smaller T_hat_r.
inline SearchResult search_schedule(RateEvaluator& eval, const SearchSpace& space, const SearchOptions& opts = {}) {
  const SystemModel& model = eval.model();
  model.require_feasible();
  const std::size_t n = model.timing().blocks;
  const std::size_t h0 = model.first_sensing_block();
  const std::size_t segments = n - h0;

  std::vector<std::vector<TracePoint>> per_segment(segments);
  parallel_for(segments, opts.threads, [&](std::size_t i) {
    const std::size_t h = h0 + i;
    for (std::size_t m : space.updates(h)) {
      const auto inner = optimize_inner(eval, h, space.partition(h, m));
      TracePoint tp{h, m, 0.0, -std::numeric_limits<double>::infinity(), inner.has_value()};
      if (inner) {
        tp.partial_time = inner->partial_time;
        tp.rate = inner->rate;
      }
      per_segment[i].push_back(tp);
    }
  });

  SearchResult result;
  const TracePoint* best = nullptr;
  for (const auto& seg : per_segment) {
    for (const auto& tp : seg) {
      result.trace.push_back(tp);
    }
  }
  for (const auto& tp : result.trace)
    if (tp.feasible && (!best || tp.rate > best->rate)) best = &tp;
  if (!best) {
    throw InfeasibleSensing("no segment meets the sensing requirement", model.requirement().binding_user,
                            model.min_sensing_time());
  }
  result.plan = FramePlan{best->sensing_blocks, best->partial_time, space.partition(best->sensing_blocks, best->updates)};
  result.plan.validate(model.timing());
  result.rate = best->rate;
  return result;
}

/// Proposed scheduler: all (h, M) with balanced partitions.
inline SearchResult optimize(RateEvaluator& eval, const SearchOptions& opts = {}) {
  const std::size_t n = eval.timing().blocks;
  const SearchSpace space{[n](std::size_t h) { return all_updates(n, h); },
                          [n](std::size_t h, std::size_t m) { return allocate_blocks(n - h, m); }};
  return search_schedule(eval, space, opts);
}

inline SearchResult optimize(const SystemModel& model, const SearchOptions& opts = {}) {
  RateEvaluator eval(model);
  return optimize(eval, opts);
}

enum class BaselineKind { kSsu, kFsu, kRba };

inline const char* baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kSsu:
      return "SSU";
    case BaselineKind::kFsu:
      return "FSU";
    case BaselineKind::kRba:
      return "RBA";
  }
  return "?";
}

inline constexpr std::size_t kRbaDraws = 50;

struct BaselineResult {
  BaselineKind kind = BaselineKind::kSsu;
  SearchResult search;             // for RBA, the search of draw 0
  double rate = 0.0;               // for RBA, the mean over draws
  std::vector<double> draw_rates;  // RBA only
};

/// Uniform random composition of total into parts >= 1: M - 1 distinct cut
/// points drawn from {1, ..., total - 1}.
inline std::vector<std::size_t> random_composition(std::size_t total, std::size_t parts, RngStream& rng) {
  if (parts == 0 || parts > total) throw ArgumentError("random_composition: need 1 <= M <= N_t");
  std::vector<std::size_t> pool(total - 1);
  std::iota(pool.begin(), pool.end(), std::size_t{1});
  for (std::size_t i = 0; i + 1 < parts; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(pool.size()) - 1));
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::size_t> cuts(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(parts - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> out;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    out.push_back(c - prev);
    prev = c;
  }
  out.push_back(total - prev);
  return out;
}

/// Stream id of the RBA partition for (draw, h, M).
inline std::uint64_t rba_stream(std::size_t draw, std::size_t h, std::size_t m, std::size_t n) {
  const std::uint64_t w = n + 1;
  return static_cast<std::uint64_t>(draw) * w * w + static_cast<std::uint64_t>(h) * w + m;
}

inline BaselineResult baseline(RateEvaluator& eval, BaselineKind kind, const RngStream& rng,
                               const SearchOptions& opts = {}) {
  const std::size_t n = eval.timing().blocks;
  BaselineResult out;
  out.kind = kind;
  switch (kind) {
    case BaselineKind::kSsu: {
      const SearchSpace space{[](std::size_t) { return std::vector<std::size_t>{1}; },
                              [n](std::size_t h, std::size_t) { return std::vector<std::size_t>{n - h}; }};
      out.search = search_schedule(eval, space, opts);
      out.rate = out.search.rate;
      break;
    }
    case BaselineKind::kFsu: {
      const SearchSpace space{[n](std::size_t h) { return std::vector<std::size_t>{n - h}; },
                              [n](std::size_t h, std::size_t) { return std::vector<std::size_t>(n - h, 1); }};
      out.search = search_schedule(eval, space, opts);
      out.rate = out.search.rate;
      break;
    }
    case BaselineKind::kRba: {
      std::vector<SearchResult> draws(kRbaDraws);
      parallel_for(kRbaDraws, opts.threads, [&](std::size_t s) {
        const SearchSpace space{[n](std::size_t h) { return all_updates(n, h); },
                                [&rng, s, n](std::size_t h, std::size_t m) {
                                  RngStream sub = rng.substream(rba_stream(s, h, m, n));
                                  return random_composition(n - h, m, sub);
                                }};
        draws[s] = search_schedule(eval, space, SearchOptions{1});
      });
      double sum = 0.0;
      for (const auto& d : draws) {
        out.draw_rates.push_back(d.rate);
        sum += d.rate;
      }
      out.rate = sum / static_cast<double>(kRbaDraws);
      out.search = std::move(draws.front());
      break;
    }
  }
  return out;
}

/// All compositions of total into exactly `parts` positive parts, in
/// lexicographic order.
inline std::vector<std::vector<std::size_t>> enumerate_compositions(std::size_t total, std::size_t parts) {
  std::vector<std::vector<std::size_t>> out;
  if (parts == 0 || parts > total) return out;
  std::vector<std::size_t> cur;
  const std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t left, std::size_t slots) {
    if (slots == 1) {
      cur.push_back(left);
      out.push_back(cur);
      cur.pop_back();
      return;
    }
    for (std::size_t first = 1; first + (slots - 1) <= left; ++first) {
      cur.push_back(first);
      rec(left - first, slots - 1);
      cur.pop_back();
    }
  };
  rec(total, parts);
  return out;
}

inline constexpr std::size_t kBruteForceMaxBlocks = 40;
inline constexpr std::size_t kFullCompositionMaxBlocks = 12;

struct CompositionBest {
  std::vector<std::size_t> blocks;
  double rate = 0.0;
};

/// Best composition of the N - h communication blocks into M parts at a
/// fixed sensing time, over every composition.
inline CompositionBest best_composition(RateEvaluator& eval, std::size_t h, double partial_time, std::size_t updates) {
  const std::size_t total = eval.timing().blocks - h;
  if (total > kFullCompositionMaxBlocks)
    throw RefusalError("best_composition: N_t = " + std::to_string(total) + " exceeds " +
                       std::to_string(kFullCompositionMaxBlocks));
  CompositionBest best;
  bool set = false;
  for (auto& c : enumerate_compositions(total, updates)) {
    const double r = eval.rate(FramePlan{h, partial_time, c});
    if (!set || r > best.rate) {
      best = {std::move(c), r};
      set = true;
    }
  }
  if (!set) throw ArgumentError("best_composition: need 1 <= M <= N_t");
  return best;
}

enum class PartitionMode { kBalanced, kAllCompositions };

/// Exhaustive oracle: every h and M, a uniform grid of grid_points values of
/// mod(T_l, T_b), and either the balanced partition or every composition.
inline SearchResult brute_force(RateEvaluator& eval, std::size_t grid_points,
                                PartitionMode mode = PartitionMode::kBalanced) {
  const SystemModel& model = eval.model();
  const std::size_t n = model.timing().blocks;
  if (n > kBruteForceMaxBlocks)
    throw RefusalError("brute_force: N = " + std::to_string(n) + " exceeds " + std::to_string(kBruteForceMaxBlocks));
  if (grid_points < 2) throw ArgumentError("brute_force: grid_points must be >= 2");
  model.require_feasible();
  const std::size_t h0 = model.first_sensing_block();
  if (mode == PartitionMode::kAllCompositions && n - h0 > kFullCompositionMaxBlocks)
    throw RefusalError("brute_force: full-composition mode needs N_t <= " +
                       std::to_string(kFullCompositionMaxBlocks) + " (got " + std::to_string(n - h0) + ")");

  SearchResult result;
  bool set = false;
  for (std::size_t h = h0; h < n; ++h) {
    const auto range = segment_range(model, h);
    for (std::size_t m = 1; m <= n - h; ++m) {
      TracePoint tp{h, m, 0.0, -std::numeric_limits<double>::infinity(), range.has_value()};
      if (range) {
        const auto parts = mode == PartitionMode::kBalanced ? std::vector<std::vector<std::size_t>>{allocate_blocks(n - h, m)}
                                                            : enumerate_compositions(n - h, m);
        for (std::size_t i = 0; i < grid_points; ++i) {
          const double r = range->lo + (range->hi - range->lo) * static_cast<double>(i) /
                                           static_cast<double>(grid_points - 1);
          for (const auto& blocks : parts) {
            const FramePlan plan{h, r, blocks};
            const double v = eval.rate(plan);
            if (v > tp.rate) {
              tp.rate = v;
              tp.partial_time = r;
            }
            if (!set || v > result.rate) {
              result.plan = plan;
              result.rate = v;
              set = true;
            }
          }
        }
      }
      result.trace.push_back(tp);
    }
  }
  if (!set) {
    throw InfeasibleSensing("no segment meets the sensing requirement", model.requirement().binding_user,
                            model.min_sensing_time());
  }
  return result;
}

/// Largest second difference of the inner objective on a uniform grid over
/// each feasible segment, for every (h, M) with balanced partitions.
struct ConcavityReport {
  double max_second_difference = -std::numeric_limits<double>::infinity();
  std::size_t sensing_blocks = 0;
  std::size_t updates = 0;
};

inline ConcavityReport segment_concavity(RateEvaluator& eval, std::size_t grid_points = 100) {
  if (grid_points < 3) throw ArgumentError("segment_concavity: grid_points must be >= 3");
  const SystemModel& model = eval.model();
  model.require_feasible();
  const std::size_t n = model.timing().blocks;
  ConcavityReport rep;
  std::vector<double> f(grid_points);
  for (std::size_t h = model.first_sensing_block(); h < n; ++h) {
    const auto range = segment_range(model, h);
    if (!range) continue;
    for (std::size_t m = 1; m <= n - h; ++m) {
      const auto blocks = allocate_blocks(n - h, m);
      for (std::size_t i = 0; i < grid_points; ++i) {
        const double r = range->lo + (range->hi - range->lo) * static_cast<double>(i) /
                                         static_cast<double>(grid_points - 1);
        f[i] = eval.rate(FramePlan{h, r, blocks});
      }
      for (std::size_t i = 1; i + 1 < grid_points; ++i) {
        const double d2 = f[i - 1] - 2.0 * f[i] + f[i + 1];
        if (d2 > rep.max_second_difference) rep = {d2, h, m};
      }
    }
  }
  return rep;
}

}  // namespace dualscale
