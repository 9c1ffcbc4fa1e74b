// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_CONFIG_HPP
#define IRSLAB_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "irslab/evaluation.hpp"
#include "irslab/io.hpp"
#include "irslab/scenario.hpp"

namespace irslab {

/// One experiment: scenario, measurement campaign, training and optimizer
/// settings, evaluation plan, and the master seed everything derives from.
struct ExperimentConfig {
  Scenario scenario;
  int measurement_count = 300;  // L
  MeasurementMode mode = MeasurementMode::exact;
  int rs_symbols = 30;  // Q
  int rs_count = 64;    // M0
  TrainConfig training;
  OptimizerSettings optimizer;
  int realizations = 50;
  std::string preset = "gain_vs_L";
  std::vector<double> axis_values;  // empty: use the preset default
  std::vector<Method> methods;      // empty: use the preset default
  std::string output_dir = "out";
  std::uint64_t seed = 1;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  for (std::string part; std::getline(in, part, sep);) parts.push_back(trim(part));
  return parts;
}

inline Vec3 parse_vec3(const std::string& text, const std::string& key) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ParseError(key + ": expected three comma-separated coordinates");
  try {
    return Vec3(std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]));
  } catch (...) {
    throw ParseError(key + ": invalid coordinate in '" + text + "'");
  }
}

inline double parse_double(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return value;
  } catch (...) {
    throw ParseError(key + ": invalid number '" + text + "'");
  }
}

inline long long parse_int(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return value;
  } catch (...) {
    throw ParseError(key + ": invalid integer '" + text + "'");
  }
}

inline bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError(key + ": invalid boolean '" + text + "'");
}

}  // namespace detail

/// Parses the flat `key = value` experiment format. Keys mirror the domain
/// field names (M, K1, K2, K3, epsilon, kappa_db, P_dbm, sigma2_dbm, mu,
/// M_cp, L, mode, Q, M0, alpha0, ...); unknown keys are rejected.
inline ExperimentConfig parse_experiment_config(const std::string& text,
                                                const std::string& origin = "<config>") {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int explicit_n = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const auto fail = [&](const std::string& why) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": " + why);
    };
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("expected 'key = value'");

    try {
      if (key == "bs_position") cfg.scenario.bs_position = detail::parse_vec3(value, key);
      else if (key == "irs_reference_position")
        cfg.scenario.irs_reference_position = detail::parse_vec3(value, key);
      else if (key == "user_positions") {
        cfg.scenario.user_positions.clear();
        for (const auto& triple : detail::split(value, ';'))
          cfg.scenario.user_positions.push_back(detail::parse_vec3(triple, key));
      } else if (key == "N") explicit_n = static_cast<int>(detail::parse_int(value, key));
      else if (key == "array_rows") cfg.scenario.array_rows = static_cast<int>(detail::parse_int(value, key));
      else if (key == "array_cols") cfg.scenario.array_cols = static_cast<int>(detail::parse_int(value, key));
      else if (key == "element_spacing") cfg.scenario.element_spacing = detail::parse_double(value, key);
      else if (key == "M") cfg.scenario.subcarrier_count = static_cast<int>(detail::parse_int(value, key));
      else if (key == "K1") cfg.scenario.taps_direct = static_cast<int>(detail::parse_int(value, key));
      else if (key == "K2") cfg.scenario.taps_bs_irs = static_cast<int>(detail::parse_int(value, key));
      else if (key == "K3") cfg.scenario.taps_irs_user = static_cast<int>(detail::parse_int(value, key));
      else if (key == "epsilon") cfg.scenario.decay_epsilon = detail::parse_double(value, key);
      else if (key == "kappa_db") cfg.scenario.rician_kappa_db = detail::parse_double(value, key);
      else if (key == "P_dbm") cfg.scenario.tx_power_dbm = detail::parse_double(value, key);
      else if (key == "sigma2_dbm") cfg.scenario.noise_power_dbm = detail::parse_double(value, key);
      else if (key == "mu") cfg.scenario.phase_bits = static_cast<int>(detail::parse_int(value, key));
      else if (key == "M_cp") cfg.scenario.cp_length = static_cast<int>(detail::parse_int(value, key));
      else if (key == "L") cfg.measurement_count = static_cast<int>(detail::parse_int(value, key));
      else if (key == "mode") cfg.mode = measurement_mode_from_string(value);
      else if (key == "Q") cfg.rs_symbols = static_cast<int>(detail::parse_int(value, key));
      else if (key == "M0") cfg.rs_count = static_cast<int>(detail::parse_int(value, key));
      else if (key == "alpha0") cfg.training.alpha0 = detail::parse_double(value, key);
      else if (key == "decay_per_iter") cfg.training.decay_per_iter = detail::parse_double(value, key);
      else if (key == "T") cfg.training.max_iterations = static_cast<int>(detail::parse_int(value, key));
      else if (key == "tau") cfg.training.tau = static_cast<int>(detail::parse_int(value, key));
      else if (key == "varsigma") cfg.training.varsigma = detail::parse_double(value, key);
      else if (key == "train_fraction") cfg.training.train_fraction = detail::parse_double(value, key);
      else if (key == "init_scale") cfg.training.init_scale = detail::parse_double(value, key);
      else if (key == "batch_size") cfg.training.batch_size = static_cast<int>(detail::parse_int(value, key));
      else if (key == "sigma2_from_min_rsrp") cfg.training.sigma2_from_min_rsrp = detail::parse_bool(value, key);
      else if (key == "num_candidates") cfg.optimizer.num_candidates = static_cast<int>(detail::parse_int(value, key));
      else if (key == "max_sweeps") cfg.optimizer.max_sweeps = static_cast<int>(detail::parse_int(value, key));
      else if (key == "multi_start") cfg.optimizer.multi_start = static_cast<int>(detail::parse_int(value, key));
      else if (key == "relax_rank") cfg.optimizer.relax_rank = static_cast<int>(detail::parse_int(value, key));
      else if (key == "relax_iters") cfg.optimizer.relax_iterations = static_cast<int>(detail::parse_int(value, key));
      else if (key == "realizations") cfg.realizations = static_cast<int>(detail::parse_int(value, key));
      else if (key == "preset") cfg.preset = value;
      else if (key == "axis") {
        cfg.axis_values.clear();
        for (const auto& item : detail::split(value, ','))
          cfg.axis_values.push_back(detail::parse_double(item, key));
      } else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& item : detail::split(value, ','))
          cfg.methods.push_back(method_from_string(item));
      } else if (key == "output_dir") cfg.output_dir = value;
      else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value, key));
      else fail("unknown key '" + key + "'");
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }

  if (explicit_n >= 0 && explicit_n != cfg.scenario.element_count())
    throw ParseError(origin + ": N = " + std::to_string(explicit_n) +
                     " contradicts array_rows * array_cols = " +
                     std::to_string(cfg.scenario.element_count()));
  cfg.scenario.validate();
  if (cfg.measurement_count < 1) throw ParseError(origin + ": L must be positive");
  if (cfg.realizations < 1) throw ParseError(origin + ": realizations must be positive");
  if (cfg.training.tau < 1) throw ParseError(origin + ": tau must be at least 1");
  if (cfg.training.alpha0 <= 0.0) throw ParseError(origin + ": alpha0 must be positive");
  if (cfg.training.varsigma <= 0.0) throw ParseError(origin + ": varsigma must be positive");
  if (cfg.training.max_iterations < 1) throw ParseError(origin + ": T must be at least 1");
  if (cfg.training.train_fraction <= 0.0 || cfg.training.train_fraction >= 1.0)
    throw ParseError(origin + ": train_fraction must be in (0, 1)");
  if (cfg.scenario.subcarrier_count % cfg.rs_count != 0)
    throw ParseError(origin + ": M0 must divide M");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text(path), path.string());
}

namespace detail {

inline std::string vec3_to_string(const Vec3& v) {
  return format_compact(v.x()) + "," + format_compact(v.y()) + "," + format_compact(v.z());
}

}  // namespace detail

/// Canonical resolved-config text; embedded in every output file and hashed
/// for file naming.
inline std::string echo_config(const ExperimentConfig& cfg) {
  std::string out;
  const auto& s = cfg.scenario;
  out += "bs_position = " + detail::vec3_to_string(s.bs_position) + "\n";
  out += "irs_reference_position = " + detail::vec3_to_string(s.irs_reference_position) + "\n";
  std::string users;
  for (const auto& u : s.user_positions) {
    if (!users.empty()) users += ";";
    users += detail::vec3_to_string(u);
  }
  out += "user_positions = " + users + "\n";
  out += "array_rows = " + std::to_string(s.array_rows) + "\n";
  out += "array_cols = " + std::to_string(s.array_cols) + "\n";
  out += "element_spacing = " + format_compact(s.element_spacing) + "\n";
  out += "M = " + std::to_string(s.subcarrier_count) + "\n";
  out += "K1 = " + std::to_string(s.taps_direct) + "\n";
  out += "K2 = " + std::to_string(s.taps_bs_irs) + "\n";
  out += "K3 = " + std::to_string(s.taps_irs_user) + "\n";
  out += "epsilon = " + format_compact(s.decay_epsilon) + "\n";
  out += "kappa_db = " + format_compact(s.rician_kappa_db) + "\n";
  out += "P_dbm = " + format_compact(s.tx_power_dbm) + "\n";
  out += "sigma2_dbm = " + format_compact(s.noise_power_dbm) + "\n";
  out += "mu = " + std::to_string(s.phase_bits) + "\n";
  out += "M_cp = " + std::to_string(s.cp_length) + "\n";
  out += "L = " + std::to_string(cfg.measurement_count) + "\n";
  out += "mode = " + to_string(cfg.mode) + "\n";
  out += "Q = " + std::to_string(cfg.rs_symbols) + "\n";
  out += "M0 = " + std::to_string(cfg.rs_count) + "\n";
  out += "alpha0 = " + format_compact(cfg.training.alpha0) + "\n";
  out += "decay_per_iter = " + format_compact(cfg.training.decay_per_iter) + "\n";
  out += "T = " + std::to_string(cfg.training.max_iterations) + "\n";
  out += "tau = " + std::to_string(cfg.training.tau) + "\n";
  out += "varsigma = " + format_compact(cfg.training.varsigma) + "\n";
  out += "train_fraction = " + format_compact(cfg.training.train_fraction) + "\n";
  out += "init_scale = " + format_compact(cfg.training.init_scale) + "\n";
  out += "batch_size = " + std::to_string(cfg.training.batch_size) + "\n";
  out += std::string("sigma2_from_min_rsrp = ") +
         (cfg.training.sigma2_from_min_rsrp ? "true" : "false") + "\n";
  out += "num_candidates = " + std::to_string(cfg.optimizer.num_candidates) + "\n";
  out += "max_sweeps = " + std::to_string(cfg.optimizer.max_sweeps) + "\n";
  out += "multi_start = " + std::to_string(cfg.optimizer.multi_start) + "\n";
  out += "relax_rank = " + std::to_string(cfg.optimizer.relax_rank) + "\n";
  out += "relax_iters = " + std::to_string(cfg.optimizer.relax_iterations) + "\n";
  out += "realizations = " + std::to_string(cfg.realizations) + "\n";
  out += "preset = " + cfg.preset + "\n";
  if (!cfg.axis_values.empty()) {
    std::string axis;
    for (double v : cfg.axis_values) {
      if (!axis.empty()) axis += ",";
      axis += format_compact(v);
    }
    out += "axis = " + axis + "\n";
  }
  if (!cfg.methods.empty()) {
    std::string methods;
    for (Method m : cfg.methods) {
      if (!methods.empty()) methods += ",";
      methods += to_string(m);
    }
    out += "methods = " + methods + "\n";
  }
  out += "output_dir = " + cfg.output_dir + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  return out;
}

/// Scenario fingerprint for output file names.
inline std::string scenario_hash(const ExperimentConfig& cfg) {
  ExperimentConfig scenario_only = cfg;
  scenario_only.output_dir.clear();
  scenario_only.seed = 0;
  const std::uint64_t h = fnv1a64(echo_config(scenario_only));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 8);
}

}  // namespace irslab

#endif  // IRSLAB_CONFIG_HPP
