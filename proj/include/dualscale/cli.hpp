#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualscale/errors.hpp"
#include "dualscale/montecarlo.hpp"
#include "dualscale/optimizer.hpp"
#include "dualscale/scenario.hpp"
#include "dualscale/sweep.hpp"
#include "dualscale/system.hpp"

namespace dualscale::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInfeasible = 2, kValidationBreach = 3 };

struct CommonOptions {
  std::string scenario_path;            // empty: default scenario
  std::string out_path;                 // empty or "-": stdout
  std::optional<std::uint64_t> seed;    // overrides the scenario seed
  std::size_t threads = 1;
};

enum class SweepAxis { kGamma, kUpdates, kSensingBlocks };

struct SweepSpec {
  SweepAxis axis = SweepAxis::kGamma;
  std::vector<double> values;
  std::vector<std::size_t> fixed;  // M list for the sensing-block axis

  void validate() const {
    if (values.empty()) throw ArgumentError("sweep: --values must not be empty");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw ArgumentError("sweep: --values must be strictly increasing");
    for (double v : values) {
      if (!std::isfinite(v)) throw ArgumentError("sweep: --values must be finite");
      if (axis == SweepAxis::kGamma && !(v > 0.0)) throw ArgumentError("sweep: Gamma values must be positive");
      if (axis != SweepAxis::kGamma && (v < 0.0 || v != std::floor(v)))
        throw ArgumentError("sweep: M and T_l block values must be non-negative integers");
      if (axis == SweepAxis::kUpdates && v < 1.0) throw ArgumentError("sweep: M values must be >= 1");
    }
    for (std::size_t m : fixed)
      if (m == 0) throw ArgumentError("sweep: --fixed M values must be >= 1");
  }
};

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "gamma") return SweepAxis::kGamma;
  if (s == "M") return SweepAxis::kUpdates;
  if (s == "Tl") return SweepAxis::kSensingBlocks;
  throw ArgumentError("unknown --axis '" + s + "' (expected gamma, M or Tl)");
}

inline std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ArgumentError("cannot parse list entry '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ArgumentError("cannot parse list entry '" + item + "'");
    out.push_back(v);
  }
  return out;
}

inline Scenario load(const CommonOptions& opts) {
  Scenario s = opts.scenario_path.empty() ? default_scenario() : load_scenario(opts.scenario_path);
  if (opts.seed) s.seed = *opts.seed;
  return s;
}

inline void write_output(const CommonOptions& opts, const std::string& text) {
  if (opts.out_path.empty() || opts.out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(opts.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + opts.out_path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + opts.out_path + "'");
}

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json plan_to_json(const FramePlan& plan, const FrameTiming& timing) {
  return {{"T_l_us", plan.sensing_time(timing) * 1e6},
          {"sensing_blocks", plan.sensing_blocks},
          {"partial_us", plan.partial_time * 1e6},
          {"M", plan.updates()},
          {"N_m", plan.blocks}};
}

/// Reads a plan written by plan_to_json and checks it against the timing.
inline FramePlan plan_from_json(const nlohmann::json& j, const FrameTiming& timing) {
  FramePlan plan;
  plan.sensing_blocks = j.at("sensing_blocks").get<std::size_t>();
  plan.partial_time = j.at("partial_us").get<double>() * 1e-6;
  plan.blocks = j.at("N_m").get<std::vector<std::size_t>>();
  if (j.at("M").get<std::size_t>() != plan.blocks.size()) throw PlanError("plan: M does not match N_m");
  plan.validate(timing);
  return plan;
}

inline nlohmann::json search_to_json(const SearchResult& r, const SystemModel& model, bool with_trace) {
  const FrameTiming& t = model.timing();
  nlohmann::json j{{"plan", plan_to_json(r.plan, t)},
                   {"rate_bitHz", r.rate},
                   {"mean_se_bpsHz", r.rate / t.frame_time()}};
  if (with_trace) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& tp : r.trace) {
      nlohmann::json e{{"h", tp.sensing_blocks}, {"M", tp.updates}, {"feasible", tp.feasible}};
      if (tp.feasible) {
        e["T_r_us"] = tp.partial_time * 1e6;
        e["rate_bitHz"] = tp.rate;
      }
      trace.push_back(e);
    }
    j["trace"] = trace;
  }
  return j;
}

inline nlohmann::json baseline_to_json(const BaselineResult& b, const SystemModel& model, double proposed) {
  nlohmann::json j{{"kind", baseline_name(b.kind)},
                   {"rate_bitHz", b.rate},
                   {"gap_vs_proposed", (proposed - b.rate) / b.rate},
                   {"plan", plan_to_json(b.search.plan, model.timing())}};
  if (b.kind == BaselineKind::kRba) {
    j["plan_note"] = "plan of draw 0";
    j["draw_rates_bitHz"] = b.draw_rates;
  }
  return j;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline int report_infeasible(const InfeasibleSensing& e, std::ostream& err) {
  err << "error: infeasible sensing: " << e.what() << " (binding user " << e.binding_user() << ")\n";
  return kInfeasible;
}

/// Runs body and maps library exceptions onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const InfeasibleSensing& e) {
    return report_infeasible(e, err);
  } catch (const ScenarioError& e) {
    err << "error: scenario: " << e.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

inline int cmd_optimize(const CommonOptions& opts, bool with_baselines, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load(opts);
    const SystemModel model(s);
    model.require_feasible();
    RateEvaluator eval(model);
    const SearchOptions so{opts.threads};
    const SearchResult r = optimize(eval, so);
    nlohmann::json j = search_to_json(r, model, true);
    j["T_l_min_us"] = model.min_sensing_time() * 1e6;
    j["binding_user"] = model.requirement().binding_user;
    if (with_baselines) {
      const RngStream rng(s.seed, 0);
      nlohmann::json b = nlohmann::json::array();
      for (BaselineKind k : {BaselineKind::kSsu, BaselineKind::kFsu, BaselineKind::kRba})
        b.push_back(baseline_to_json(baseline(eval, k, rng, so), model, r.rate));
      j["baselines"] = b;
    }
    write_output(opts, dump(j));
    return int{kOk};
  });
}

inline int cmd_baselines(const CommonOptions& opts, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load(opts);
    const SystemModel model(s);
    model.require_feasible();
    RateEvaluator eval(model);
    const SearchOptions so{opts.threads};
    const SearchResult r = optimize(eval, so);
    const RngStream rng(s.seed, 0);
    nlohmann::json j{{"proposed", search_to_json(r, model, false)}};
    nlohmann::json table = nlohmann::json::array();
    for (BaselineKind k : {BaselineKind::kSsu, BaselineKind::kFsu, BaselineKind::kRba})
      table.push_back(baseline_to_json(baseline(eval, k, rng, so), model, r.rate));
    j["baselines"] = table;
    write_output(opts, dump(j));
    return int{kOk};
  });
}

inline std::string sweep_csv(const Scenario& s, const SweepSpec& spec, std::size_t threads) {
  spec.validate();
  std::ostringstream out;
  const SearchOptions so{threads};
  switch (spec.axis) {
    case SweepAxis::kGamma: {
      std::vector<GammaPoint> rows(spec.values.size());
      parallel_for(rows.size(), threads, [&](std::size_t i) { rows[i] = gamma_point(s, spec.values[i]); });
      out << "axis_value,proposed,ssu,fsu,rba_mean\n";
      for (const auto& r : rows)
        out << format_number(r.gamma) << ',' << format_number(r.proposed) << ',' << format_number(r.ssu) << ','
            << format_number(r.fsu) << ',' << format_number(r.rba_mean) << '\n';
      break;
    }
    case SweepAxis::kUpdates: {
      const SystemModel model(s);
      RateEvaluator eval(model);
      const SearchResult best = optimize(eval, so);
      std::vector<std::size_t> ms;
      for (double v : spec.values) ms.push_back(static_cast<std::size_t>(v));
      const auto rates = rate_vs_updates(eval, best.plan.sensing_blocks, best.plan.partial_time, ms);
      const double tl_us = best.plan.sensing_time(model.timing()) * 1e6;
      out << "axis_value,rate,T_l_us\n";
      for (std::size_t i = 0; i < ms.size(); ++i)
        out << ms[i] << ',' << format_number(rates[i]) << ',' << format_number(tl_us) << '\n';
      break;
    }
    case SweepAxis::kSensingBlocks: {
      const SystemModel model(s);
      model.require_feasible();
      RateEvaluator eval(model);
      const std::vector<std::size_t> ms = spec.fixed.empty() ? std::vector<std::size_t>{1, 7, 20} : spec.fixed;
      std::vector<std::size_t> bs;
      for (double v : spec.values) bs.push_back(static_cast<std::size_t>(v));
      std::vector<std::vector<double>> cols;
      for (std::size_t m : ms) cols.push_back(rate_vs_sensing_blocks(eval, bs, m));
      out << "axis_value";
      for (std::size_t m : ms) out << ",rate_M" << m;
      out << '\n';
      for (std::size_t i = 0; i < bs.size(); ++i) {
        out << bs[i];
        for (const auto& c : cols) out << ',' << format_number(c[i]);
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

inline int cmd_sweep(const CommonOptions& opts, const SweepSpec& spec, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario s = load(opts);
    write_output(opts, sweep_csv(s, spec, opts.threads));
    return int{kOk};
  });
}

inline nlohmann::json mc_report_to_json(const McReport& r) {
  return {{"user", r.user},
          {"n", r.n},
          {"samples", r.samples},
          {"signal_empirical", {r.signal_empirical.real(), r.signal_empirical.imag()}},
          {"signal_analytical", r.signal_analytical},
          {"signal_rel_error", r.signal_error},
          {"gain_variance_empirical", r.gain_variance_empirical},
          {"gain_variance_analytical", r.gain_variance_analytical},
          {"gain_variance_rel_error", r.gain_variance_error},
          {"interference_empirical", r.interference_empirical},
          {"interference_analytical", r.interference_analytical},
          {"interference_rel_error", r.interference_error},
          {"sinr_empirical", r.sinr_empirical},
          {"sinr_analytical", r.sinr_analytical},
          {"sinr_rel_error", r.sinr_error}};
}

struct ValidateOptions {
  std::size_t samples = 200000;
  std::optional<std::size_t> sensing_blocks;  // with updates, replaces the optimized plan
  std::optional<std::size_t> updates;
};

inline int cmd_validate(const CommonOptions& opts, const ValidateOptions& v, std::ostream& err) {
  if (v.samples < kMinMcSamples) {
    err << "error: --samples must be >= " << kMinMcSamples << "\n";
    return kUsage;
  }
  if (v.sensing_blocks.has_value() != v.updates.has_value()) {
    err << "error: --tl-blocks and --updates must be given together\n";
    return kUsage;
  }
  return guarded(err, [&] {
    const Scenario s = load(opts);
    const SystemModel model(s);
    model.require_feasible();
    FramePlan plan;
    if (v.sensing_blocks) {
      const std::size_t n = model.timing().blocks;
      if (*v.sensing_blocks >= n || *v.updates == 0 || *v.updates > n - *v.sensing_blocks)
        throw ArgumentError("validate: need 1 <= M <= N - T_l blocks");
      plan = FramePlan{*v.sensing_blocks, 0.0, allocate_blocks(n - *v.sensing_blocks, *v.updates)};
      if (plan.sensing_time(model.timing()) < model.min_sensing_time())
        throw InfeasibleSensing("validate: T_l below T_l^min", model.requirement().binding_user,
                                model.min_sensing_time());
    } else {
      RateEvaluator eval(model);
      plan = optimize(eval, SearchOptions{opts.threads}).plan;
    }
    const Proposition1Report rep = verify_proposition1(model, plan, v.samples, RngStream(s.seed, 1), opts.threads);
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : rep.reports) reports.push_back(mc_report_to_json(r));
    nlohmann::json j{{"plan", plan_to_json(plan, model.timing())},
                     {"tolerance", kMcTolerance},
                     {"passed", rep.passed()},
                     {"reports", reports}};
    write_output(opts, dump(j));
    if (!rep.passed()) {
      for (std::size_t i : rep.failing)
        err << "validation breach: user " << rep.reports[i].user << ", n = " << rep.reports[i].n
            << ", relative SINR error " << rep.reports[i].sinr_error << "\n";
      return int{kValidationBreach};
    }
    return int{kOk};
  });
}

}  // namespace dualscale::cli
