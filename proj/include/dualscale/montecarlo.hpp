#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dualscale/channel.hpp"
#include "dualscale/errors.hpp"
#include "dualscale/estimation.hpp"
#include "dualscale/numerics/hermitian.hpp"
#include "dualscale/numerics/parallel.hpp"
#include "dualscale/numerics/rng.hpp"
#include "dualscale/numerics/sampling.hpp"
#include "dualscale/numerics/summation.hpp"
#include "dualscale/rate.hpp"
#include "dualscale/sensing.hpp"
#include "dualscale/system.hpp"

namespace dualscale {

inline constexpr std::size_t kMinMcSamples = 10000;
inline constexpr std::size_t kMcChunk = 8192;

/// Generative inputs for one user of the Monte-Carlo chain.
struct McUser {
  HermitianMatrix r_hat;          // covariance of h_hat
  HermitianMatrix sensing_error;  // R_r
  SpatialCorrelation spatial;
  double beta = 1.0;
  double power = 0.0;
  TemporalModel temporal = TemporalModel::exponential(1.0);
  std::optional<double> rho_override;  // replaces temporal_coeff when set
};

struct McSetup {
  std::vector<McUser> users;
  PilotConfig pilot;
  double comm_noise = 1.0;

  double rho(std::size_t k, std::size_t n) const {
    const McUser& u = users.at(k);
    return u.rho_override ? *u.rho_override : temporal_coeff(u.temporal, n);
  }
};

inline McSetup mc_setup(const SystemModel& model, double sensing_time) {
  McSetup s;
  s.pilot = model.pilot();
  s.comm_noise = model.scenario().comm_noise;
  for (std::size_t k = 0; k < model.user_count(); ++k) {
    const UserLargeScale& u = model.user(k);
    McUser mu;
    mu.sensing_error = sensing_error_covariance(u.direction, u.crb.crb(sensing_time));
    mu.r_hat = effective_correlation(u.geometry.beta, u.spatial, mu.sensing_error);
    mu.spatial = u.spatial;
    mu.beta = u.geometry.beta;
    mu.power = u.power;
    mu.temporal = u.temporal;
    s.users.push_back(std::move(mu));
  }
  return s;
}

/// Empirical and analytical values of the SINR decomposition for one (k, n).
struct McReport {
  std::size_t user = 0;
  std::size_t n = 1;
  std::size_t samples = 0;

  std::complex<double> signal_empirical;  // E[h_k,n^H f_k,n]
  double signal_analytical = 0.0;         // rho sqrt(tr C_h,k)
  double signal_error = 0.0;

  double gain_variance_empirical = 0.0;   // Var(h_k,n^H f_k,n)
  double gain_variance_analytical = 0.0;  // beta_k tr(R_k C_h,k) / tr(C_h,k)
  double gain_variance_error = 0.0;

  std::vector<double> interference_empirical;   // E|h_k,n^H f_i,n|^2, i != k (entry k unused)
  std::vector<double> interference_analytical;  // beta_k tr(R_k C_h,i) / tr(C_h,i)
  double interference_error = 0.0;              // worst over i != k

  double sinr_empirical = 0.0;
  double sinr_analytical = 0.0;
  double sinr_error = 0.0;
};

namespace detail {

inline double rel_err(double empirical, double analytical) {
  if (analytical == 0.0) return std::abs(empirical);
  return std::abs(empirical - analytical) / std::abs(analytical);
}

struct McAccumulator {
  CompensatedSum<std::complex<double>> signal;
  CompensatedSum<double> signal_power;
  std::vector<CompensatedSum<double>> cross;  // |h_k^H f_i|^2

  void merge(const McAccumulator& o) {
    signal.add(o.signal);
    signal_power.add(o.signal_power);
    for (std::size_t i = 0; i < cross.size(); ++i) cross[i].add(o.cross[i]);
  }
};

}  // namespace detail

/// Simulates the chain h_1 = h_hat + e_r, pilot observation, MMSE estimate,
/// aging to block n and MRT beams, for every requested (k, n) at once.
/// Draws are split into fixed chunks with their own sub-streams and merged
/// in chunk order, so results do not depend on `threads`.
inline std::vector<McReport> simulate_sinr_batch(const McSetup& setup,
                                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                                 std::size_t samples, const RngStream& rng, std::size_t threads = 1) {
  if (samples < kMinMcSamples)
    throw ArgumentError("simulate_sinr: samples must be >= " + std::to_string(kMinMcSamples));
  setup.pilot.validate();
  const std::size_t users = setup.users.size();
  if (users == 0) throw ArgumentError("simulate_sinr: no users");
  for (const auto& [k, n] : pairs)
    if (k >= users || n == 0) throw ArgumentError("simulate_sinr: need k < K and n >= 1");

  const double gamma_e = setup.pilot.snr();
  const double pilot_gain = static_cast<double>(setup.pilot.symbols) * std::sqrt(setup.pilot.power);
  const double pilot_noise_std = std::sqrt(static_cast<double>(setup.pilot.symbols) * setup.pilot.noise);

  std::vector<ComplexGaussianSampler> hat_sampler;
  std::vector<ComplexGaussianSampler> err_sampler;
  std::vector<EstimatorStats> stats;
  std::vector<double> beam_scale;
  for (const McUser& u : setup.users) {
    hat_sampler.emplace_back(u.r_hat);
    err_sampler.emplace_back(u.sensing_error);
    stats.push_back(mmse_stats(u.r_hat, gamma_e));
    const double t = stats.back().c_h.trace();
    if (!(t > 0.0)) throw DegenerateBeamError("simulate_sinr: tr(C_h) vanished", stats.size() - 1);
    beam_scale.push_back(1.0 / std::sqrt(t));
  }

  // One aging sampler per distinct (k, n).
  std::vector<double> rho(pairs.size());
  std::vector<ComplexGaussianSampler> age_sampler;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [k, n] = pairs[p];
    rho[p] = setup.rho(k, n);
    if (std::abs(rho[p]) > 1.0) throw ArgumentError("simulate_sinr: |rho| must be <= 1");
    const McUser& u = setup.users[k];
    age_sampler.emplace_back(u.spatial.matrix * (u.beta * (1.0 - rho[p] * rho[p])));
  }

  const std::size_t chunks = (samples + kMcChunk - 1) / kMcChunk;
  std::vector<std::vector<detail::McAccumulator>> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    RngStream stream = rng.substream(c);
    const std::size_t begin = c * kMcChunk;
    const std::size_t end = std::min(samples, begin + kMcChunk);
    std::vector<detail::McAccumulator> acc(pairs.size());
    for (auto& a : acc) a.cross.resize(users);

    const Eigen::Index dim = setup.users.front().r_hat.dim();
    std::vector<CVector> h1(users, CVector(dim));
    std::vector<CVector> beam(users, CVector(dim));
    CVector hat(dim), err(dim), y(dim), aged(dim), scratch(dim);
    for (std::size_t s = begin; s < end; ++s) {
      for (std::size_t i = 0; i < users; ++i) {
        hat_sampler[i].draw_into(stream, hat, scratch);
        err_sampler[i].draw_into(stream, err, scratch);
        h1[i] = hat + err;
        for (Eigen::Index l = 0; l < dim; ++l) y(l) = pilot_gain * hat(l) + pilot_noise_std * stream.complex_normal();
        beam[i].noalias() = stats[i].filter * y;
        beam[i] *= beam_scale[i] / pilot_gain;
      }
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const std::size_t k = pairs[p].first;
        age_sampler[p].draw_into(stream, aged, scratch);
        aged += rho[p] * h1[k];
        for (std::size_t i = 0; i < users; ++i) {
          const cd g = aged.dot(beam[i]);  // h^H f
          if (i == k) {
            acc[p].signal.add(g);
            acc[p].signal_power.add(std::norm(g));
          } else {
            acc[p].cross[i].add(std::norm(g));
          }
        }
      }
    }
    partial[c] = std::move(acc);
  });

  std::vector<McReport> out;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [k, n] = pairs[p];
    detail::McAccumulator total;
    total.cross.resize(users);
    for (const auto& chunk : partial) total.merge(chunk[p]);
    const double inv = 1.0 / static_cast<double>(samples);

    McReport r;
    r.user = k;
    r.n = n;
    r.samples = samples;
    r.signal_empirical = total.signal.value() * inv;
    r.signal_analytical = rho[p] * std::sqrt(stats[k].c_h.trace());
    r.signal_error = r.signal_analytical != 0.0
                         ? std::abs(r.signal_empirical - r.signal_analytical) / std::abs(r.signal_analytical)
                         : std::abs(r.signal_empirical);

    r.gain_variance_empirical = total.signal_power.value() * inv - std::norm(r.signal_empirical);
    const McUser& uk = setup.users[k];
    r.gain_variance_analytical = uk.beta * trace_product(uk.spatial.matrix, stats[k].c_h) / stats[k].c_h.trace();
    r.gain_variance_error = detail::rel_err(r.gain_variance_empirical, r.gain_variance_analytical);

    r.interference_empirical.assign(users, 0.0);
    r.interference_analytical.assign(users, 0.0);
    double denom_emp = uk.power * r.gain_variance_empirical + setup.comm_noise;
    for (std::size_t i = 0; i < users; ++i) {
      if (i == k) continue;
      r.interference_empirical[i] = total.cross[i].value() * inv;
      r.interference_analytical[i] = uk.beta * trace_product(uk.spatial.matrix, stats[i].c_h) / stats[i].c_h.trace();
      r.interference_error =
          std::max(r.interference_error, detail::rel_err(r.interference_empirical[i], r.interference_analytical[i]));
      denom_emp += setup.users[i].power * r.interference_empirical[i];
    }
    r.sinr_empirical = uk.power * std::norm(r.signal_empirical) / denom_emp;

    std::vector<SinrUser> su;
    for (std::size_t i = 0; i < users; ++i)
      su.push_back(SinrUser{setup.users[i].power, setup.users[i].beta, &setup.users[i].spatial, &stats[i]});
    r.sinr_analytical = sinr(k, rho[p], su, setup.comm_noise);
    r.sinr_error = detail::rel_err(r.sinr_empirical, r.sinr_analytical);
    out.push_back(std::move(r));
  }
  return out;
}

inline McReport simulate_sinr(const McSetup& setup, std::size_t k, std::size_t n, std::size_t samples,
                              const RngStream& rng, std::size_t threads = 1) {
  return simulate_sinr_batch(setup, {{k, n}}, samples, rng, threads).front();
}

inline McReport simulate_sinr(const SystemModel& model, const FramePlan& plan, std::size_t k, std::size_t n,
                              std::size_t samples, const RngStream& rng, std::size_t threads = 1) {
  plan.validate(model.timing());
  return simulate_sinr(mc_setup(model, plan.sensing_time(model.timing())), k, n, samples, rng, threads);
}

inline constexpr double kMcTolerance = 0.05;

struct Proposition1Report {
  std::vector<McReport> reports;
  std::vector<std::size_t> failing;  // indices into reports with sinr_error > tolerance
  bool passed() const { return failing.empty(); }
};

/// Aging indices checked for a plan: {1, ceil(N_m/2), N_m} over every
/// distinct N_m of the plan.
inline std::vector<std::size_t> proposition1_indices(const FramePlan& plan) {
  std::set<std::size_t> idx;
  for (std::size_t nm : plan.blocks) {
    idx.insert(1);
    idx.insert((nm + 1) / 2);
    idx.insert(nm);
  }
  return {idx.begin(), idx.end()};
}

inline Proposition1Report verify_proposition1(const SystemModel& model, const FramePlan& plan, std::size_t samples,
                                              const RngStream& rng, std::size_t threads = 1,
                                              double tolerance = kMcTolerance) {
  plan.validate(model.timing());
  const McSetup setup = mc_setup(model, plan.sensing_time(model.timing()));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < model.user_count(); ++k)
    for (std::size_t n : proposition1_indices(plan)) pairs.emplace_back(k, n);
  Proposition1Report rep;
  rep.reports = simulate_sinr_batch(setup, pairs, samples, rng, threads);
  for (std::size_t i = 0; i < rep.reports.size(); ++i)
    if (rep.reports[i].sinr_error > tolerance) rep.failing.push_back(i);
  return rep;
}

inline constexpr double kDeltaMethodCrbLimit = 1e-3;

struct DeltaMethodReport {
  double relative_error = 0.0;
  CMatrix empirical;
  CMatrix analytical;
  bool outside_linear_regime = false;  // crb > kDeltaMethodCrbLimit
};

/// Draws theta_hat = theta + N(0, crb) and compares the covariance of
/// f(theta_hat) - f(theta), f = sqrt(beta) a, with crb f' f'^H.
inline DeltaMethodReport verify_delta_method(const UserGeometry& user, std::size_t tx_antennas, double crb,
                                             std::size_t samples, RngStream& rng) {
  if (!(crb >= 0.0)) throw ArgumentError("verify_delta_method: crb must be >= 0");
  if (samples < 2) throw ArgumentError("verify_delta_method: need at least 2 samples");
  DeltaMethodReport rep;
  rep.outside_linear_regime = crb > kDeltaMethodCrbLimit;
  rep.analytical = sensing_error_covariance(error_direction(user.theta, user.beta, tx_antennas), crb).matrix();
  const auto dim = static_cast<Eigen::Index>(tx_antennas);
  if (crb == 0.0) {
    rep.empirical = CMatrix::Zero(dim, dim);
    return rep;
  }
  const double sb = std::sqrt(user.beta);
  const CVector f0 = sb * steering_tx(user.theta, tx_antennas);
  const double sd = std::sqrt(crb);
  CVector mean = CVector::Zero(dim);
  CMatrix second = CMatrix::Zero(dim, dim);
  for (std::size_t s = 0; s < samples; ++s) {
    const CVector d = sb * steering_tx(user.theta + sd * rng.normal(), tx_antennas) - f0;
    mean += d;
    second.noalias() += d * d.adjoint();
  }
  const double inv = 1.0 / static_cast<double>(samples);
  mean *= inv;
  rep.empirical = (second * inv - mean * mean.adjoint()) * (static_cast<double>(samples) / (samples - 1.0));
  rep.relative_error = relative_frobenius_error(rep.empirical, rep.analytical);
  return rep;
}

}  // namespace dualscale
