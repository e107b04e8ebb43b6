#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dualscale/channel.hpp"
#include "dualscale/errors.hpp"
#include "dualscale/estimation.hpp"
#include "dualscale/rate.hpp"
#include "dualscale/scenario.hpp"
#include "dualscale/sensing.hpp"

namespace dualscale {

/// Per-user quantities that do not depend on the schedule.
struct UserLargeScale {
  UserGeometry geometry;
  SpatialCorrelation spatial;   // R_k, trace one
  double spatial_norm = 0.0;    // ||R_k||_2
  HermitianMatrix direction;    // f'_k f'_k^H
  CrbModel crb;                 // c_k
  TemporalModel temporal = TemporalModel::exponential(1.0);
  double power = 0.0;           // p_k, mW
};

/// A Scenario converted to SI units with every T_l-independent quantity
/// precomputed. Immutable after construction.
class SystemModel {
 public:
  explicit SystemModel(const Scenario& scenario) : scenario_(scenario) {
    scenario_.validate();
    timing_.symbol_time = scenario_.symbol_time_us * 1e-6;
    timing_.block_symbols = scenario_.block_symbols;
    timing_.pilot_symbols = scenario_.pilot_symbols;
    timing_.blocks = scenario_.blocks;
    pilot_ = PilotConfig{scenario_.pilot_symbols, scenario_.pilot_power(), scenario_.pilot_noise};

    const double p = scenario_.data_power_mw();
    for (std::size_t k = 0; k < scenario_.user_count(); ++k) {
      const UserSpec& spec = scenario_.users[k];
      UserLargeScale u;
      u.geometry = UserGeometry{deg_to_rad(spec.theta_deg), deg_to_rad(spec.delta_theta_deg), spec.beta};
      u.spatial = spatial_correlation(u.geometry, scenario_.tx_antennas, scenario_.quad_order);
      u.spatial_norm = u.spatial.matrix.spectral_norm();
      u.direction = error_direction(u.geometry.theta, spec.beta, scenario_.tx_antennas);
      const SensingScene scene{cd(std::sqrt(spec.alpha_mag2), 0.0), scenario_.matched_filter_gain,
                               scenario_.rx_antennas, scenario_.sensing_noise};
      u.crb = crb_coefficient(scene, u.geometry.theta, scenario_.tx_antennas);
      u.temporal = scenario_.temporal_for(k);
      u.power = p;
      users_.push_back(std::move(u));
    }

    std::vector<SensingUser> sensing;
    for (std::size_t k = 0; k < users_.size(); ++k) {
      const UserLargeScale& u = users_[k];
      sensing.push_back(SensingUser{u.crb, u.geometry.beta, u.spatial, u.direction, scenario_.gamma_for(k)});
    }
    requirement_ = sensing_requirement(sensing);
  }

  const Scenario& scenario() const noexcept { return scenario_; }
  const FrameTiming& timing() const noexcept { return timing_; }
  const PilotConfig& pilot() const noexcept { return pilot_; }
  std::size_t user_count() const noexcept { return users_.size(); }
  const UserLargeScale& user(std::size_t k) const { return users_.at(k); }
  const SensingRequirement& requirement() const noexcept { return requirement_; }
  double min_sensing_time() const noexcept { return requirement_.min_time; }

  /// Throws InfeasibleSensing unless T_l^min leaves at least one
  /// communication block.
  void require_feasible() const {
    const double limit = static_cast<double>(timing_.blocks) * timing_.block_time();
    if (requirement_.min_time > limit || first_sensing_block() >= timing_.blocks) {
      throw InfeasibleSensing("sensing requirement of user " + std::to_string(requirement_.binding_user) +
                                  " needs T_l >= " + std::to_string(requirement_.min_time * 1e6) +
                                  " us, which leaves no communication block in the " +
                                  std::to_string(limit * 1e6) + " us subframe",
                              requirement_.binding_user, requirement_.min_time);
    }
  }

  /// floor(T_l^min / T_b).
  std::size_t first_sensing_block() const {
    return static_cast<std::size_t>(std::floor(requirement_.min_time / timing_.block_time()));
  }

  /// R_hat_k at sensing time T_l.
  HermitianMatrix effective_correlation_at(std::size_t k, double sensing_time) const {
    const UserLargeScale& u = users_.at(k);
    return effective_correlation(u.geometry.beta, u.spatial,
                                 sensing_error_covariance(u.direction, u.crb.crb(sensing_time)));
  }

  std::vector<EstimatorStats> stats_at(double sensing_time) const {
    std::vector<EstimatorStats> out;
    out.reserve(users_.size());
    for (std::size_t k = 0; k < users_.size(); ++k)
      out.push_back(mmse_stats(effective_correlation_at(k, sensing_time), pilot_.snr()));
    return out;
  }

  std::vector<SinrUser> sinr_users(const std::vector<EstimatorStats>& stats) const {
    std::vector<SinrUser> out;
    for (std::size_t k = 0; k < users_.size(); ++k)
      out.push_back(SinrUser{users_[k].power, users_[k].geometry.beta, &users_[k].spatial, &stats.at(k)});
    return out;
  }

  LinkBudget link_from_stats(const std::vector<EstimatorStats>& stats) const {
    const std::vector<SinrUser> su = sinr_users(stats);
    std::vector<LinkBudget::User> lu;
    for (std::size_t k = 0; k < users_.size(); ++k) {
      LinkBudget::User u;
      u.power = users_[k].power;
      u.beta = users_[k].geometry.beta;
      u.spatial_norm = users_[k].spatial_norm;
      u.trace_ch = stats[k].c_h.trace();
      u.interference = interference_sum(k, su);
      u.temporal = users_[k].temporal;
      lu.push_back(u);
    }
    return LinkBudget(std::move(lu), scenario_.total_power_mw(), scenario_.comm_noise);
  }

  LinkBudget link_at(double sensing_time) const { return link_from_stats(stats_at(sensing_time)); }

  RateReport rate(const FramePlan& plan) const {
    plan.validate(timing_);
    return frame_rate(link_at(plan.sensing_time(timing_)), plan, timing_);
  }

 private:
  Scenario scenario_;
  FrameTiming timing_;
  PilotConfig pilot_;
  std::vector<UserLargeScale> users_;
  SensingRequirement requirement_;
};

/// sigma_r^2 that puts T_l^min at target_blocks * T_b. Every term of T_l^min
/// is proportional to sigma_r^2, so one evaluation at the scenario's value
/// fixes the scale.
inline double calibrate_sensing_noise(const Scenario& scenario, double target_blocks) {
  if (!(target_blocks > 0.0)) throw ArgumentError("calibrate_sensing_noise: target must be positive");
  Scenario probe = scenario;
  probe.sensing_noise = 1.0;
  const SystemModel model(probe);
  return target_blocks * model.timing().block_time() / model.min_sensing_time();
}

}  // namespace dualscale
