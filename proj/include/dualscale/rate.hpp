#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dualscale/channel.hpp"
#include "dualscale/errors.hpp"
#include "dualscale/estimation.hpp"
#include "dualscale/numerics/hermitian.hpp"

namespace dualscale {

/// Subframe timing: N blocks of M_b symbols, M_m pilot symbols per update.
struct FrameTiming {
  double symbol_time = 1e-6;     // T_s, seconds
  std::size_t block_symbols = 70;  // M_b
  std::size_t pilot_symbols = 9;   // M_m
  std::size_t blocks = 35;         // N

  double block_time() const { return static_cast<double>(block_symbols) * symbol_time; }
  double pilot_time() const { return static_cast<double>(pilot_symbols) * symbol_time; }
  double frame_time() const { return static_cast<double>(blocks) * block_time(); }
};

/// A subframe schedule. The sensing duration is kept as whole blocks plus a
/// partial block so that floor(T_l / T_b) is exact.
struct FramePlan {
  std::size_t sensing_blocks = 0;      // floor(T_l / T_b)
  double partial_time = 0.0;           // mod(T_l, T_b), in [0, T_b)
  std::vector<std::size_t> blocks;     // N_m for m = 1..M

  std::size_t updates() const { return blocks.size(); }
  double sensing_time(const FrameTiming& t) const {
    return static_cast<double>(sensing_blocks) * t.block_time() + partial_time;
  }
  std::size_t communication_blocks() const { return std::accumulate(blocks.begin(), blocks.end(), std::size_t{0}); }

  void validate(const FrameTiming& t) const {
    if (blocks.empty()) throw PlanError("FramePlan: M must be >= 1");
    if (blocks.size() > t.blocks) throw PlanError("FramePlan: M must be <= N");
    for (std::size_t nm : blocks)
      if (nm == 0) throw PlanError("FramePlan: every N_m must be >= 1");
    if (!(partial_time >= 0.0) || !(partial_time < t.block_time()))
      throw PlanError("FramePlan: mod(T_l, T_b) must lie in [0, T_b)");
    if (sensing_blocks + communication_blocks() != t.blocks)
      throw PlanError("FramePlan: floor(T_l/T_b) + sum N_m must equal N (got " +
                      std::to_string(sensing_blocks + communication_blocks()) + ", N = " +
                      std::to_string(t.blocks) + ")");
    if (sensing_time(t) > t.frame_time()) throw PlanError("FramePlan: T_l must be <= N T_b");
  }

  bool operator==(const FramePlan&) const = default;
};

inline double spectral_efficiency(double gamma) {
  if (!(gamma >= 0.0)) throw ArgumentError("spectral_efficiency: SINR must be >= 0");
  return std::log2(1.0 + gamma);
}

/// gamma = p_k rho^2 tr(C_h,k) / (interference + sigma_c^2), where
/// interference = sum_i beta_k p_i tr(R_k C_h,i) / tr(C_h,i) over all users
/// including k.
inline double sinr_from_terms(double power, double rho, double trace_ch, double interference, double noise) {
  return power * rho * rho * trace_ch / (interference + noise);
}

/// Per-user inputs of the closed-form SINR.
struct SinrUser {
  double power = 0.0;                  // p_k
  double beta = 1.0;                   // beta_k
  const SpatialCorrelation* spatial = nullptr;
  const EstimatorStats* stats = nullptr;
};

inline double interference_sum(std::size_t k, std::span<const SinrUser> users) {
  double acc = 0.0;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const double tr_i = users[i].stats->c_h.trace();
    if (!(tr_i > 0.0))
      throw DegenerateBeamError("sinr: tr(C_h) vanished for user " + std::to_string(i), i);
    acc += users[k].beta * users[i].power * trace_product(users[k].spatial->matrix, users[i].stats->c_h) / tr_i;
  }
  return acc;
}

/// Closed-form SINR of user k under MRT with aged, doubly imperfect estimates.
inline double sinr(std::size_t k, double rho, std::span<const SinrUser> users, double noise) {
  if (k >= users.size()) throw ArgumentError("sinr: user index out of range");
  const double interference = interference_sum(k, users);
  return sinr_from_terms(users[k].power, rho, users[k].stats->c_h.trace(), interference, noise);
}

/// Lower bound obtained from tr(R C) <= ||R||_2 tr(C) and sum_i p_i = P_t.
inline double sinr_lower_bound(std::size_t k, double rho, std::span<const SinrUser> users, double total_power,
                               double noise) {
  if (k >= users.size()) throw ArgumentError("sinr_lower_bound: user index out of range");
  for (std::size_t i = 0; i < users.size(); ++i)
    if (!(users[i].stats->c_h.trace() > 0.0))
      throw DegenerateBeamError("sinr_lower_bound: tr(C_h) vanished for user " + std::to_string(i), i);
  const double bound_interference = users[k].beta * total_power * users[k].spatial->matrix.spectral_norm();
  return sinr_from_terms(users[k].power, rho, users[k].stats->c_h.trace(), bound_interference, noise);
}

/// Everything needed to evaluate SINR and SE at one sensing duration:
/// tr(C_h,k), the interference sums and the temporal models.
class LinkBudget {
 public:
  struct User {
    double power = 0.0;
    double beta = 1.0;
    double spatial_norm = 1.0;  // ||R_k||_2
    double trace_ch = 0.0;
    double interference = 0.0;
    TemporalModel temporal = TemporalModel::exponential(1.0);
  };

  LinkBudget(std::vector<User> users, double total_power, double noise)
      : users_(std::move(users)), total_power_(total_power), noise_(noise) {}

  std::size_t size() const noexcept { return users_.size(); }
  const User& user(std::size_t k) const { return users_.at(k); }
  double noise() const noexcept { return noise_; }

  double rho(std::size_t k, std::size_t n) const { return temporal_coeff(users_.at(k).temporal, n); }

  double sinr(std::size_t k, std::size_t n) const {
    const User& u = users_.at(k);
    return sinr_from_terms(u.power, rho(k, n), u.trace_ch, u.interference, noise_);
  }
  double sinr_lower_bound(std::size_t k, std::size_t n) const {
    const User& u = users_.at(k);
    return sinr_from_terms(u.power, rho(k, n), u.trace_ch, u.beta * total_power_ * u.spatial_norm, noise_);
  }
  double se(std::size_t k, std::size_t n) const { return spectral_efficiency(sinr(k, n)); }

 private:
  std::vector<User> users_;
  double total_power_;
  double noise_;
};

/// Spectral efficiencies and the subframe rate of one plan.
struct RateReport {
  std::vector<std::vector<double>> se;  // se[k][n-1], n = 1..max N_m
  double total_rate = 0.0;              // seconds * bps/Hz
  double overhead_time = 0.0;           // M T_m + mod(T_l, T_b)
};

/// Subframe rate from per-user SE rows (se[k][n-1]).
/// Blocks are summed in descending N_m order so that permuted partitions
/// give bit-identical totals.
inline double combine_frame_rate(const std::vector<std::vector<double>>& se, const FramePlan& plan,
                                 const FrameTiming& timing, double* overhead_out = nullptr) {
  std::size_t max_n = 0;
  for (std::size_t nm : plan.blocks) max_n = std::max(max_n, nm);
  std::vector<double> block_sum(max_n, 0.0);  // Phi_n = sum_k SE_{k,n}
  for (const auto& row : se) {
    if (row.size() < max_n) throw ArgumentError("combine_frame_rate: SE table too short");
    for (std::size_t n = 0; n < max_n; ++n) block_sum[n] += row[n];
  }
  std::vector<double> prefix(max_n + 1, 0.0);
  for (std::size_t n = 0; n < max_n; ++n) prefix[n + 1] = prefix[n] + block_sum[n];

  std::vector<std::size_t> sorted = plan.blocks;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double blocks_total = 0.0;
  for (std::size_t nm : sorted) blocks_total += prefix[nm];

  const double overhead = static_cast<double>(plan.updates()) * timing.pilot_time() + plan.partial_time;
  if (overhead_out) *overhead_out = overhead;
  return timing.block_time() * blocks_total - overhead * (max_n > 0 ? block_sum[0] : 0.0);
}

/// Rate of a plan given the link budget at its sensing duration.
inline RateReport frame_rate(const LinkBudget& link, const FramePlan& plan, const FrameTiming& timing) {
  plan.validate(timing);
  std::size_t max_n = 0;
  for (std::size_t nm : plan.blocks) max_n = std::max(max_n, nm);
  RateReport report;
  report.se.assign(link.size(), std::vector<double>(max_n, 0.0));
  for (std::size_t k = 0; k < link.size(); ++k)
    for (std::size_t n = 1; n <= max_n; ++n) report.se[k][n - 1] = link.se(k, n);
  report.total_rate = combine_frame_rate(report.se, plan, timing, &report.overhead_time);
  return report;
}

}  // namespace dualscale
