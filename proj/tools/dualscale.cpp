#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dualscale/cli.hpp"

namespace {

void add_common(CLI::App* cmd, dualscale::cli::CommonOptions& opts) {
  cmd->add_option("--scenario", opts.scenario_path, "Scenario JSON (default scenario when omitted)");
  cmd->add_option("--out", opts.out_path, "Output file (stdout when omitted)");
  cmd->add_option("--seed", opts.seed, "Override the scenario seed");
  cmd->add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace dualscale::cli;
  CLI::App app{"Dual-scale channel estimation scheduler"};
  app.require_subcommand(1);

  CommonOptions common;
  bool with_baselines = false;
  auto* optimize = app.add_subcommand("optimize", "Optimize the subframe schedule");
  add_common(optimize, common);
  optimize->add_flag("--baselines", with_baselines, "Also run SSU, FSU and RBA");

  auto* sweep = app.add_subcommand("sweep", "Rate sweep over Gamma, M or T_l blocks (CSV)");
  add_common(sweep, common);
  std::string axis = "gamma";
  std::string values;
  std::string fixed;
  sweep->add_option("--axis", axis, "gamma | M | Tl")->check(CLI::IsMember({"gamma", "M", "Tl"}));
  sweep->add_option("--values", values, "Comma-separated, strictly increasing axis values")->required();
  sweep->add_option("--fixed", fixed, "Comma-separated M values for the Tl axis (default 1,7,20)");

  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of the closed-form SINR");
  add_common(validate, common);
  ValidateOptions vopts;
  validate->add_option("--samples", vopts.samples, "Monte-Carlo draws (>= 10000)");
  validate->add_option("--tl-blocks", vopts.sensing_blocks, "Sensing blocks of the checked plan");
  validate->add_option("--updates", vopts.updates, "Small-scale updates of the checked plan");

  auto* baselines = app.add_subcommand("baselines", "Compare the optimized schedule with SSU, FSU and RBA");
  add_common(baselines, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*optimize) return cmd_optimize(common, with_baselines, std::cerr);
  if (*baselines) return cmd_baselines(common, std::cerr);
  if (*validate) return cmd_validate(common, vopts, std::cerr);

  SweepSpec spec;
  try {
    spec.axis = parse_axis(axis);
    spec.values = parse_number_list(values);
    if (!fixed.empty()) {
      if (spec.axis != SweepAxis::kSensingBlocks) throw dualscale::ArgumentError("--fixed applies to --axis Tl only");
      for (double m : parse_number_list(fixed)) {
        if (m < 1.0 || m != static_cast<double>(static_cast<std::size_t>(m)))
          throw dualscale::ArgumentError("--fixed entries must be positive integers");
        spec.fixed.push_back(static_cast<std::size_t>(m));
      }
    }
    spec.validate();
  } catch (const dualscale::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return cmd_sweep(common, spec, std::cerr);
}
