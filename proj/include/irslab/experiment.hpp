// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_EXPERIMENT_HPP
#define IRSLAB_EXPERIMENT_HPP

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "irslab/config.hpp"
#include "irslab/evaluation.hpp"
#include "irslab/io.hpp"

namespace irslab {

struct SweepPreset {
  SweepAxis axis;
  SweepMetric metric;
  std::vector<double> default_axis;
  std::vector<Method> default_methods;
  int default_measurement_count;
};

inline const std::map<std::string, SweepPreset>& sweep_presets() {
  static const std::map<std::string, SweepPreset> presets = {
      {"nmse_vs_L",
       {SweepAxis::measurement_count,
        SweepMetric::nmse,
        {100.0, 200.0, 300.0},
        {Method::proposed, Method::rank_one, Method::true_rank},
        300}},
      {"gain_vs_L",
       {SweepAxis::measurement_count,
        SweepMetric::gain,
        {100.0, 200.0, 300.0},
        {Method::proposed, Method::csm, Method::rms, Method::upper_bound},
        300}},
      {"rate_vs_epsilon",
       {SweepAxis::decay_factor,
        SweepMetric::rate,
        {0.5, 1.0, 2.0, 3.0},
        {Method::proposed, Method::csm, Method::rms, Method::upper_bound},
        300}},
      {"tap_power",
       {SweepAxis::tap_index,
        SweepMetric::tap_power,
        {},
        {Method::proposed, Method::no_irs},
        350}},
  };
  return presets;
}

inline SweepSpec make_sweep_spec(const ExperimentConfig& cfg) {
  const auto it = sweep_presets().find(cfg.preset);
  if (it == sweep_presets().end()) {
    std::string known;
    for (const auto& [name, preset] : sweep_presets()) {
      if (!known.empty()) known += ", ";
      known += name;
    }
    throw std::invalid_argument("unknown preset '" + cfg.preset + "'; available presets: " +
                                known);
  }
  const SweepPreset& preset = it->second;
  SweepSpec spec;
  spec.axis = preset.axis;
  spec.metric = preset.metric;
  spec.axis_values = cfg.axis_values.empty() ? preset.default_axis : cfg.axis_values;
  spec.methods = cfg.methods.empty() ? preset.default_methods : cfg.methods;
  spec.realizations = cfg.realizations;
  spec.seed = cfg.seed;
  spec.mode = cfg.mode;
  spec.measurement_count = cfg.measurement_count > 0 ? cfg.measurement_count
                                                     : preset.default_measurement_count;
  spec.rs_count = cfg.rs_count;
  spec.rs_symbols = cfg.rs_symbols;
  spec.training = cfg.training;
  spec.optimizer = cfg.optimizer;
  return spec;
}

namespace detail {

inline std::filesystem::path output_path(const ExperimentConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.output_dir) / name;
}

inline std::string provenance(const ExperimentConfig& cfg) {
  return "irslab output\n" + echo_config(cfg);
}

}  // namespace detail

/**
 * @brief Simulates channels and measurement campaigns for every configured
 * user: writes the channel realization dump, the true autocorrelation matrix
 * and the measurement set, deterministically from the master seed.
 */
inline std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& cfg) {
  cfg.scenario.validate();
  std::vector<std::filesystem::path> written;
  const std::string echo = detail::provenance(cfg);
  for (std::size_t u = 0; u < cfg.scenario.user_positions.size(); ++u) {
    RngStream channel_rng(derive_seed(cfg.seed, "channel", u));
    RngStream reflection_rng(derive_seed(cfg.seed, "reflections", u));
    RngStream noise_rng(derive_seed(cfg.seed, "measurement", u));

    const ChannelRealization channel =
        sample_channel(cfg.scenario, static_cast<int>(u), channel_rng);
    const CirMatrix cir = build_cir_matrix(channel, cfg.scenario.subcarrier_count);
    const AutocorrMatrix truth = autocorrelation(cir, cfg.scenario.tx_power_watts());

    MeasurementSet measurements;
    if (cfg.mode == MeasurementMode::exact) {
      measurements = collect_exact(cfg.measurement_count, truth,
                                   cfg.scenario.noise_power_watts(), cfg.scenario.phase_bits,
                                   reflection_rng);
    } else {
      const RsPattern pattern(cfg.scenario.subcarrier_count, cfg.rs_count, cfg.rs_symbols);
      measurements = collect_sampled(cfg.measurement_count, cir, pattern,
                                     cfg.scenario.tx_power_watts(),
                                     cfg.scenario.noise_power_watts(), cfg.scenario.phase_bits,
                                     reflection_rng, noise_rng);
    }

    const std::string suffix = "_u" + std::to_string(u) + ".txt";
    const auto channel_path = detail::output_path(cfg, "channel" + suffix);
    const auto truth_path = detail::output_path(cfg, "r_true" + suffix);
    const auto measurement_path = detail::output_path(cfg, "measurements" + suffix);
    save_channel(channel_path, channel, echo);
    save_matrix(truth_path, truth.entries, {{"power_scale", format_full(truth.power_scale)}},
                echo);
    save_measurement_set(measurement_path, measurements, echo);
    written.push_back(channel_path);
    written.push_back(truth_path);
    written.push_back(measurement_path);
  }
  return written;
}

struct EstimateOutput {
  std::filesystem::path estimate_path;
  std::filesystem::path report_path;
  TrainReport report;
};

/// Runs progressive training on a measurement file and writes the estimated
/// autocorrelation matrix plus the training report.
inline EstimateOutput cmd_estimate(const ExperimentConfig& cfg,
                                   const std::filesystem::path& measurement_file) {
  const MeasurementSet set = load_measurement_set(measurement_file);
  TrainConfig training = cfg.training;
  training.seed = derive_seed(cfg.seed, "train");
  if (training.max_subnetworks <= 0)
    training.max_subnetworks = std::min(set.element_count + 1, cfg.scenario.subcarrier_count);

  auto [model, report] = progressive_train(set, training);
  const EstimatedAutocorr estimate = reconstruct_autocorrelation(model);

  EstimateOutput out;
  out.estimate_path = detail::output_path(cfg, "r_estimate.txt");
  out.report_path = detail::output_path(cfg, "train_report.json");
  save_matrix(out.estimate_path, estimate.entries,
              {{"rank_bound", std::to_string(estimate.rank_bound)}}, detail::provenance(cfg));

  nlohmann::json j;
  j["k_star"] = report.selected_subnetworks;
  j["delta_star"] = report.selected_delta;
  j["stop_reason"] = report.stop_reason;
  j["train_count"] = report.train_count;
  j["normalization_scale"] = report.normalization_scale;
  j["sigma2_used"] = report.sigma2_used;
  j["seed"] = cfg.seed;
  j["stages"] = nlohmann::json::array();
  for (const auto& stage : report.stages) {
    nlohmann::json js;
    js["k_prime"] = stage.subnetwork_count;
    js["delta"] = stage.delta;
    js["best_iteration"] = stage.best_iteration;
    js["wall_ms"] = stage.wall_ms;
    js["trajectory"] = nlohmann::json::array();
    for (const auto& step : stage.trajectory)
      js["trajectory"].push_back({{"t", step.iteration},
                                  {"train_loss", step.train_loss},
                                  {"val_mse", step.validation_mse}});
    j["stages"].push_back(std::move(js));
  }
  j["config"] = echo_config(cfg);
  atomic_write_text(out.report_path, j.dump(2) + "\n");
  out.report = std::move(report);
  return out;
}

struct OptimizeOutput {
  std::filesystem::path result_path;
  OptimizationResult result;
};

/**
 * @brief Optimizes the IRS reflection with the selected method and writes the
 * result (method, integer phase indices, objective, sweep count). Estimator
 * methods and the perfect-CSI bound consume a matrix dump; the measurement
 * baselines consume a measurement file.
 */
inline OptimizeOutput cmd_optimize(const ExperimentConfig& cfg, const std::string& method_name,
                                   const std::filesystem::path& r_file,
                                   const std::filesystem::path& measurement_file = {}) {
  const Method method = method_from_string(method_name);
  OptimizationResult result{uniform_reflection(cfg.scenario.element_count(),
                                               cfg.scenario.phase_bits),
                            0.0, 0, method_name};

  const double tx_power = cfg.scenario.tx_power_watts();
  if (method == Method::csm || method == Method::rms) {
    if (measurement_file.empty())
      throw std::invalid_argument("method " + method_name + " requires a measurement file");
    const MeasurementSet set = load_measurement_set(measurement_file);
    ReflectionVector v =
        method == Method::csm ? csm_baseline(set) : rms_baseline(set);
    if (!r_file.empty()) {
      const CMatrix r = load_matrix(r_file);
      result.objective = objective_value(v, r, tx_power);
    }
    result.reflection = std::move(v);
    result.sweeps = 0;
  } else if (method == Method::proposed || method == Method::upper_bound) {
    if (r_file.empty())
      throw std::invalid_argument("method " + method_name +
                                  " requires an autocorrelation matrix file");
    const CMatrix r = load_matrix(r_file);
    RngStream rng(derive_seed(cfg.seed, "optimizer"));
    OptimizationResult refined = detail::optimize_reflection_full(
        r, cfg.scenario.phase_bits, cfg.optimizer, rng, tx_power);
    result.reflection = std::move(refined.reflection);
    result.objective = refined.objective;
    result.sweeps = refined.sweeps;
  } else {
    throw std::invalid_argument("method not supported by cmd_optimize: " + method_name);
  }
  result.method = method_name;

  nlohmann::json j;
  j["method"] = result.method;
  j["phase_indices"] = result.reflection.indices();
  j["mu"] = result.reflection.mu();
  j["objective"] = result.objective;
  j["sweeps"] = result.sweeps;
  j["seed"] = cfg.seed;
  j["config"] = echo_config(cfg);

  const auto result_path = detail::output_path(cfg, "reflection_" + method_name + ".json");
  atomic_write_text(result_path, j.dump(2) + "\n");
  return {result_path, std::move(result)};
}

/// Runs the configured preset campaign and writes the CSV; the file name
/// embeds the scenario hash and the seed.
inline std::filesystem::path cmd_sweep(const ExperimentConfig& cfg) {
  const SweepSpec spec = make_sweep_spec(cfg);
  const SweepResult result = run_sweep(cfg.scenario, spec);
  const std::string name =
      "sweep_" + cfg.preset + "_" + scenario_hash(cfg) + "_seed" + std::to_string(cfg.seed) +
      ".csv";
  const auto path = detail::output_path(cfg, name);
  save_sweep_csv(path, result, detail::provenance(cfg));
  return path;
}

/// Parses and validates a config file, echoing the resolved values.
inline ExperimentConfig cmd_validate_config(const std::filesystem::path& path,
                                            std::ostream& os = std::cout) {
  const ExperimentConfig cfg = load_experiment_config(path);
  if (!cfg.preset.empty()) make_sweep_spec(cfg);  // also rejects unknown presets
  os << echo_config(cfg);
  return cfg;
}

}  // namespace irslab

#endif  // IRSLAB_EXPERIMENT_HPP
