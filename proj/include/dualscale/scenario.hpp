#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualscale/channel.hpp"
#include "dualscale/errors.hpp"

namespace dualscale {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct UserSpec {
  double theta_deg = 0.0;
  double delta_theta_deg = 1.0;
  double beta = 1.0;
  double alpha_mag2 = 1.0;                  // |alpha_k|^2
  std::optional<TemporalModel> temporal;    // falls back to Scenario::temporal
};

/// Sensing noise variance shipped with the default scenario. Chosen so that
/// the minimum sensing time at Gamma = 0.5 rad^2 is 3.5 blocks, i.e. the
/// first feasible whole-block sensing duration is 4 blocks. With the default
/// geometry the PSD premise binds (for the users at +-60 deg), so
/// T_l^min = sigma_r2 * max_k T_psd,k(sigma_r2 = 1). Reproduce with
/// calibrate_sensing_noise(default_scenario(), 3.5) in system.hpp.
inline constexpr double kDefaultSensingNoise = 0.021886438092153328;

/// Full system description. Angles in degrees, times in microseconds and
/// powers in dBm at this boundary; SystemModel converts to SI.
struct Scenario {
  std::size_t tx_antennas = 8;   // L_t
  std::size_t rx_antennas = 8;   // L_r
  std::vector<UserSpec> users;
  double total_power_dbm = 23.0;            // P_t, split evenly across users
  std::optional<double> pilot_power_mw;     // P_m; default P_t / K
  double sensing_noise = kDefaultSensingNoise;  // sigma_r^2
  double pilot_noise = 1.0;                 // sigma_m^2
  double comm_noise = 1.0;                  // sigma_c^2
  double symbol_time_us = 1.0;              // T_s
  std::size_t block_symbols = 70;           // M_b
  std::size_t pilot_symbols = 9;            // M_m
  std::size_t blocks = 35;                  // N
  double matched_filter_gain = 1e3;         // G
  std::vector<double> gamma{0.5};           // Gamma, rad^2; one shared value or one per user
  TemporalModel temporal = TemporalModel::exponential(0.98);
  std::size_t quad_order = kDefaultQuadOrder;
  std::uint64_t seed = 1;

  std::size_t user_count() const { return users.size(); }
  double total_power_mw() const { return dbm_to_mw(total_power_dbm); }
  double data_power_mw() const { return total_power_mw() / static_cast<double>(users.size()); }
  double pilot_power() const { return pilot_power_mw.value_or(data_power_mw()); }
  double gamma_for(std::size_t k) const { return gamma.size() == 1 ? gamma.front() : gamma.at(k); }
  const TemporalModel& temporal_for(std::size_t k) const {
    const auto& u = users.at(k);
    return u.temporal ? *u.temporal : temporal;
  }

  void validate() const;
};

/// Five users at -60, -30, 0, 30, 60 degrees with 1 degree spread; 8x8
/// array, 23 dBm, rho_1 = 0.98, T_s = 1 us, M_b = 70, M_m = 9, N = 35.
inline Scenario default_scenario() {
  Scenario s;
  for (double th : {-60.0, -30.0, 0.0, 30.0, 60.0}) s.users.push_back(UserSpec{th, 1.0, 1.0, 1.0, std::nullopt});
  return s;
}

inline void Scenario::validate() const {
  const auto positive = [](const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ScenarioError(field, "must be a positive finite number");
  };
  const auto count = [](const char* field, std::size_t v) {
    if (v < 1) throw ScenarioError(field, "must be >= 1");
  };
  count("L_t", tx_antennas);
  count("L_r", rx_antennas);
  if (tx_antennas > 64) throw ScenarioError("L_t", "must be <= 64");
  if (users.empty()) throw ScenarioError("users", "at least one user is required");
  for (std::size_t k = 0; k < users.size(); ++k) {
    const std::string p = "users[" + std::to_string(k) + "].";
    const UserSpec& u = users[k];
    if (!(std::abs(u.theta_deg) < 90.0)) throw ScenarioError(p + "theta_deg", "must satisfy |theta| < 90");
    if (!(u.delta_theta_deg > 0.0)) throw ScenarioError(p + "delta_theta_deg", "must be positive");
    if (!(u.beta > 0.0)) throw ScenarioError(p + "beta", "must be positive");
    if (!(u.alpha_mag2 > 0.0)) throw ScenarioError(p + "alpha_mag2", "must be positive");
  }
  if (!std::isfinite(total_power_dbm)) throw ScenarioError("P_t_dbm", "must be finite");
  if (pilot_power_mw) positive("P_m_mw", *pilot_power_mw);
  positive("sigma_r2", sensing_noise);
  positive("sigma_m2", pilot_noise);
  positive("sigma_c2", comm_noise);
  positive("T_s_us", symbol_time_us);
  count("M_b", block_symbols);
  count("M_m", pilot_symbols);
  if (pilot_symbols > block_symbols) throw ScenarioError("M_m", "must not exceed M_b");
  count("N", blocks);
  positive("G", matched_filter_gain);
  if (gamma.empty() || (gamma.size() != 1 && gamma.size() != users.size()))
    throw ScenarioError("Gamma", "must be one number or one per user");
  for (double g : gamma) positive("Gamma", g);
  if (quad_order < 8) throw ScenarioError("quad_order", "must be >= 8");
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ScenarioError(prefix + it.key(), "unknown key");
}

inline double get_number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ScenarioError(path + key, "must be a number");
  return v.get<double>();
}

inline std::size_t get_count(const json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ScenarioError(path + key, "must be a non-negative integer");
  return v.get<std::size_t>();
}

inline TemporalModel parse_temporal(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ScenarioError(path, "must be an object");
  reject_unknown(obj, {"kind", "rho_1", "f_d_max_Tb"}, path + ".");
  if (!obj.contains("kind") || !obj.at("kind").is_string()) throw ScenarioError(path + ".kind", "must be a string");
  const std::string kind = obj.at("kind").get<std::string>();
  try {
    if (kind == "exponential") {
      if (obj.contains("f_d_max_Tb")) throw ScenarioError(path + ".f_d_max_Tb", "not valid for exponential model");
      return TemporalModel::exponential(get_number(obj, "rho_1", path + ".", 0.98));
    }
    if (kind == "jakes") {
      if (obj.contains("rho_1")) throw ScenarioError(path + ".rho_1", "not valid for jakes model");
      if (!obj.contains("f_d_max_Tb")) throw ScenarioError(path + ".f_d_max_Tb", "required for jakes model");
      return TemporalModel::jakes(get_number(obj, "f_d_max_Tb", path + ".", 0.0));
    }
  } catch (const ArgumentError& e) {
    throw ScenarioError(path, e.what());
  }
  throw ScenarioError(path + ".kind", "must be \"exponential\" or \"jakes\"");
}

inline json temporal_to_json(const TemporalModel& m) {
  if (m.kind() == TemporalModel::Kind::kJakes) return {{"kind", "jakes"}, {"f_d_max_Tb", m.parameter()}};
  return {{"kind", "exponential"}, {"rho_1", m.parameter()}};
}

}  // namespace detail

/// Parses a scenario document; absent fields keep the defaults of
/// default_scenario(). Unknown keys are rejected.
inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::get_count;
  using detail::get_number;
  if (!doc.is_object()) throw ScenarioError("<root>", "scenario must be a JSON object");
  detail::reject_unknown(doc,
                         {"L_t", "L_r", "users", "P_t_dbm", "P_m_mw", "sigma_r2", "sigma_m2", "sigma_c2", "T_s_us",
                          "M_b", "M_m", "N", "G", "Gamma", "temporal", "quad_order", "seed"},
                         "");
  Scenario s = default_scenario();
  s.tx_antennas = get_count(doc, "L_t", "", s.tx_antennas);
  s.rx_antennas = get_count(doc, "L_r", "", s.rx_antennas);
  if (doc.contains("users")) {
    const auto& arr = doc.at("users");
    if (!arr.is_array()) throw ScenarioError("users", "must be an array");
    s.users.clear();
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string p = "users[" + std::to_string(k) + "].";
      const auto& u = arr[k];
      if (!u.is_object()) throw ScenarioError("users[" + std::to_string(k) + "]", "must be an object");
      detail::reject_unknown(u, {"theta_deg", "delta_theta_deg", "beta", "alpha_mag2", "temporal"}, p);
      if (!u.contains("theta_deg")) throw ScenarioError(p + "theta_deg", "required");
      UserSpec spec;
      spec.theta_deg = get_number(u, "theta_deg", p, 0.0);
      spec.delta_theta_deg = get_number(u, "delta_theta_deg", p, 1.0);
      spec.beta = get_number(u, "beta", p, 1.0);
      spec.alpha_mag2 = get_number(u, "alpha_mag2", p, 1.0);
      if (u.contains("temporal")) spec.temporal = detail::parse_temporal(u.at("temporal"), p + "temporal");
      s.users.push_back(spec);
    }
  }
  s.total_power_dbm = get_number(doc, "P_t_dbm", "", s.total_power_dbm);
  if (doc.contains("P_m_mw")) s.pilot_power_mw = get_number(doc, "P_m_mw", "", 0.0);
  s.sensing_noise = get_number(doc, "sigma_r2", "", s.sensing_noise);
  s.pilot_noise = get_number(doc, "sigma_m2", "", s.pilot_noise);
  s.comm_noise = get_number(doc, "sigma_c2", "", s.comm_noise);
  s.symbol_time_us = get_number(doc, "T_s_us", "", s.symbol_time_us);
  s.block_symbols = get_count(doc, "M_b", "", s.block_symbols);
  s.pilot_symbols = get_count(doc, "M_m", "", s.pilot_symbols);
  s.blocks = get_count(doc, "N", "", s.blocks);
  s.matched_filter_gain = get_number(doc, "G", "", s.matched_filter_gain);
  if (doc.contains("Gamma")) {
    const auto& g = doc.at("Gamma");
    s.gamma.clear();
    if (g.is_number()) {
      s.gamma.push_back(g.get<double>());
    } else if (g.is_array()) {
      for (const auto& v : g) {
        if (!v.is_number()) throw ScenarioError("Gamma", "entries must be numbers");
        s.gamma.push_back(v.get<double>());
      }
    } else {
      throw ScenarioError("Gamma", "must be a number or an array of numbers");
    }
  }
  if (doc.contains("temporal")) s.temporal = detail::parse_temporal(doc.at("temporal"), "temporal");
  s.quad_order = get_count(doc, "quad_order", "", s.quad_order);
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ScenarioError("seed", "must be a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }
  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("<file>", "cannot open scenario file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("<file>", std::string("parse error: ") + e.what());
  }
  return scenario_from_json(doc);
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : s.users) {
    nlohmann::json j{{"theta_deg", u.theta_deg},
                     {"delta_theta_deg", u.delta_theta_deg},
                     {"beta", u.beta},
                     {"alpha_mag2", u.alpha_mag2}};
    if (u.temporal) j["temporal"] = detail::temporal_to_json(*u.temporal);
    users.push_back(j);
  }
  nlohmann::json doc{{"L_t", s.tx_antennas},
                     {"L_r", s.rx_antennas},
                     {"users", users},
                     {"P_t_dbm", s.total_power_dbm},
                     {"sigma_r2", s.sensing_noise},
                     {"sigma_m2", s.pilot_noise},
                     {"sigma_c2", s.comm_noise},
                     {"T_s_us", s.symbol_time_us},
                     {"M_b", s.block_symbols},
                     {"M_m", s.pilot_symbols},
                     {"N", s.blocks},
                     {"G", s.matched_filter_gain},
                     {"temporal", detail::temporal_to_json(s.temporal)},
                     {"quad_order", s.quad_order},
                     {"seed", s.seed}};
  if (s.pilot_power_mw) doc["P_m_mw"] = *s.pilot_power_mw;
  if (s.gamma.size() == 1) {
    doc["Gamma"] = s.gamma.front();
  } else {
    doc["Gamma"] = s.gamma;
  }
  return doc;
}

}  // namespace dualscale
