// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver: scenario configuration, seeded measurement campaigns,
// channel-autocorrelation estimation, reflection optimization and Monte Carlo
// sweeps, with all artifacts written as reproducible text files.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "irslab/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

struct CommonOptions {
  std::string config_file;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required = true) {
  auto* config = cmd->add_option("-c,--config", opts.config_file, "experiment config file");
  if (config_required) config->required();
  cmd->add_option("-o,--output", opts.output_dir, "output directory override");
  cmd->add_option("-s,--seed", opts.seed, "master seed override");
}

int load_config(const CommonOptions& opts, irslab::ExperimentConfig& cfg) {
  try {
    cfg = opts.config_file.empty() ? irslab::ExperimentConfig{}
                                   : irslab::load_experiment_config(opts.config_file);
    if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
    if (opts.seed) cfg.seed = *opts.seed;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS wideband channel autocorrelation estimation and reflection design"};
  app.require_subcommand(1);

  CommonOptions simulate_opts;
  auto* simulate = app.add_subcommand(
      "simulate", "generate channel, true-R and measurement files for each user");
  add_common(simulate, simulate_opts);

  CommonOptions estimate_opts;
  std::string measurement_file;
  auto* estimate = app.add_subcommand(
      "estimate", "recover the channel autocorrelation matrix from a measurement file");
  add_common(estimate, estimate_opts);
  estimate->add_option("-m,--measurements", measurement_file, "measurement set file")->required();

  CommonOptions optimize_opts;
  std::string method = "proposed";
  std::string r_file;
  std::string optimize_measurements;
  auto* optimize =
      app.add_subcommand("optimize", "design the IRS reflection with the selected method");
  add_common(optimize, optimize_opts);
  optimize->add_option("--method", method,
                       "one of proposed, upper_bound, rms, csm");
  optimize->add_option("-r,--r-matrix", r_file, "autocorrelation matrix dump");
  optimize->add_option("-m,--measurements", optimize_measurements,
                       "measurement set file (rms/csm)");

  CommonOptions sweep_opts;
  std::string preset_override;
  auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo campaign preset, emit CSV");
  add_common(sweep, sweep_opts);
  sweep->add_option("-p,--preset", preset_override,
                    "preset: nmse_vs_L, gain_vs_L, rate_vs_epsilon, tap_power");

  CommonOptions validate_opts;
  auto* validate = app.add_subcommand("validate-config", "parse, validate and echo a config");
  add_common(validate, validate_opts);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    irslab::ExperimentConfig cfg;
    if (int rc = load_config(simulate_opts, cfg)) return rc;
    return run_guarded([&] {
      for (const auto& path : irslab::cmd_simulate(cfg)) std::cout << path.string() << "\n";
      return kExitOk;
    });
  }

  if (estimate->parsed()) {
    irslab::ExperimentConfig cfg;
    if (int rc = load_config(estimate_opts, cfg)) return rc;
    return run_guarded([&] {
      const auto out = irslab::cmd_estimate(cfg, measurement_file);
      std::cout << "k_star " << out.report.selected_subnetworks << "\n"
                << "stop_reason " << out.report.stop_reason << "\n"
                << out.estimate_path.string() << "\n"
                << out.report_path.string() << "\n";
      return kExitOk;
    });
  }

  if (optimize->parsed()) {
    irslab::ExperimentConfig cfg;
    if (int rc = load_config(optimize_opts, cfg)) return rc;
    return run_guarded([&] {
      const auto out = irslab::cmd_optimize(cfg, method, r_file, optimize_measurements);
      std::cout << "objective " << irslab::format_full(out.result.objective) << "\n"
                << out.result_path.string() << "\n";
      return kExitOk;
    });
  }

  if (sweep->parsed()) {
    irslab::ExperimentConfig cfg;
    if (int rc = load_config(sweep_opts, cfg)) return rc;
    if (!preset_override.empty()) cfg.preset = preset_override;
    try {
      irslab::make_sweep_spec(cfg);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfigError;
    }
    return run_guarded([&] {
      std::cout << irslab::cmd_sweep(cfg).string() << "\n";
      return kExitOk;
    });
  }

  if (validate->parsed()) {
    try {
      irslab::cmd_validate_config(validate_opts.config_file);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitConfigError;
    }
    return kExitOk;
  }

  return kExitConfigError;
}
