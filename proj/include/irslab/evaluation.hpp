// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_EVALUATION_HPP
#define IRSLAB_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "irslab/channel.hpp"
#include "irslab/common.hpp"
#include "irslab/estimator.hpp"
#include "irslab/measurement.hpp"
#include "irslab/optimizer.hpp"
#include "irslab/scenario.hpp"

namespace irslab {

/// Received power split across delay taps: |(G v)_k|^2 for k = 0..K-1.
/// Accepts any length-(N+1) vector so the no-IRS case (v_n = 0) nests exactly.
inline RVector per_tap_power(const CirMatrix& cir, const CVector& reflection) {
  if (reflection.size() != cir.element_count() + 1)
    throw std::invalid_argument("per_tap_power: reflection dimension mismatch");
  const CVector superimposed = cir.entries * reflection;
  RVector power(cir.max_taps());
  for (int k = 0; k < cir.max_taps(); ++k) power(k) = std::norm(superimposed(k));
  return power;
}

/// Direct-channel-only probe [1, 0, ..., 0].
inline CVector direct_only_vector(int element_count) {
  CVector v = CVector::Zero(element_count + 1);
  v(0) = Complex(1.0, 0.0);
  return v;
}

/**
 * @brief Water-filling power allocation: P_m = max(0, nu - sigma2/|h_m|^2)
 * with the water level found by bisection so the powers sum to the budget.
 * Subcarriers with zero gain receive zero power.
 */
inline RVector water_filling(const RVector& gains, double total_power, double sigma2) {
  if (total_power <= 0.0) throw std::invalid_argument("water_filling: power must be positive");
  double min_floor = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; m < gains.size(); ++m) {
    if (gains(m) < 0.0) throw std::invalid_argument("water_filling: gains must be nonnegative");
    if (gains(m) > 0.0) min_floor = std::min(min_floor, sigma2 / gains(m));
  }
  if (!std::isfinite(min_floor))
    throw std::invalid_argument("water_filling: all channel gains are zero");

  const auto allocated = [&](double level) {
    double total = 0.0;
    for (Eigen::Index m = 0; m < gains.size(); ++m)
      if (gains(m) > 0.0) total += std::max(0.0, level - sigma2 / gains(m));
    return total;
  };

  double lo = min_floor;
  double hi = min_floor + total_power;
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (allocated(mid) < total_power ? lo : hi) = mid;
  }
  const double level = 0.5 * (lo + hi);

  RVector allocation = RVector::Zero(gains.size());
  for (Eigen::Index m = 0; m < gains.size(); ++m)
    if (gains(m) > 0.0) allocation(m) = std::max(0.0, level - sigma2 / gains(m));
  return allocation;
}

enum class PowerAllocation { waterfilling, equal };

struct RateConfig {
  int cp_length = 0;        // M_cp
  double tx_power_watts = 1.0;
  double sigma2 = 1.0;
  PowerAllocation allocation = PowerAllocation::waterfilling;
};

/// OFDM achievable rate in bps/Hz with the configured per-subcarrier
/// allocation; the cyclic prefix counts against the symbol duration.
inline double achievable_rate(const CirMatrix& cir, const CVector& reflection,
                              const RateConfig& cfg) {
  if (reflection.size() != cir.element_count() + 1)
    throw std::invalid_argument("achievable_rate: reflection dimension mismatch");
  const int m_total = cir.subcarrier_count();
  const CVector response =
      dft_of_taps(cir.entries * reflection, m_total, cir.max_taps());
  RVector gains(m_total);
  for (int m = 0; m < m_total; ++m) gains(m) = std::norm(response(m));
  if (gains.maxCoeff() <= 0.0) return 0.0;

  RVector allocation;
  if (cfg.allocation == PowerAllocation::waterfilling)
    allocation = water_filling(gains, cfg.tx_power_watts, cfg.sigma2);
  else
    allocation = RVector::Constant(m_total, cfg.tx_power_watts / m_total);

  double sum = 0.0;
  for (int m = 0; m < m_total; ++m)
    sum += std::log2(1.0 + allocation(m) * gains(m) / cfg.sigma2);
  return sum / (m_total + cfg.cp_length);
}

// ---------------------------------------------------------------------------
// Monte Carlo sweep driver
// ---------------------------------------------------------------------------

enum class Method { proposed, rank_one, true_rank, csm, rms, upper_bound, no_irs };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::rank_one: return "rank_one";
    case Method::true_rank: return "true_rank";
    case Method::csm: return "csm";
    case Method::rms: return "rms";
    case Method::upper_bound: return "upper_bound";
    case Method::no_irs: return "no_irs";
  }
  throw std::logic_error("unreachable");
}

inline Method method_from_string(const std::string& s) {
  for (Method m : {Method::proposed, Method::rank_one, Method::true_rank, Method::csm,
                   Method::rms, Method::upper_bound, Method::no_irs})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown method: " + s);
}

enum class SweepAxis { measurement_count, decay_factor, tap_index };
enum class SweepMetric { gain, nmse, rate, tap_power };

struct OptimizerSettings {
  int num_candidates = 100;
  int max_sweeps = 100;
  int multi_start = 1;
  int relax_rank = 0;  // 0 = ceil(sqrt(2(N+1)))
  int relax_iterations = 500;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::measurement_count;
  std::vector<double> axis_values;
  std::vector<Method> methods;
  SweepMetric metric = SweepMetric::gain;
  int realizations = 50;
  std::uint64_t seed = 1;
  MeasurementMode mode = MeasurementMode::exact;
  int measurement_count = 300;  // L, overridden per axis value on an L sweep
  int rs_count = 64;            // M0, sampled mode only
  int rs_symbols = 30;          // Q, sampled mode only
  TrainConfig training;
  OptimizerSettings optimizer;
  PowerAllocation allocation = PowerAllocation::waterfilling;
};

struct SweepCell {
  double axis_value;
  std::string method;
  double mean;
  double std_err;
  int count;
};

struct SweepResult {
  std::vector<SweepCell> cells;
};

namespace detail {

/// Full design pipeline: refine the best relaxation-randomized candidate,
/// plus (multi_start - 1) random starts to escape refinement local optima;
/// the best refined reflection wins.
inline OptimizationResult optimize_reflection_full(const CMatrix& r, int mu,
                                                   const OptimizerSettings& opt, RngStream& rng,
                                                   double tx_power_watts = 1.0) {
  const int n_elements = static_cast<int>(r.rows()) - 1;
  ReflectionVector seeded =
      relax_and_randomize(r, mu, opt.num_candidates, rng, opt.relax_rank, opt.relax_iterations);
  OptimizationResult refined = successive_refine(seeded, r, tx_power_watts, opt.max_sweeps);
  for (int s = 1; s < opt.multi_start; ++s) {
    const ReflectionVector start = random_reflection(n_elements, mu, rng);
    OptimizationResult candidate = successive_refine(start, r, tx_power_watts, opt.max_sweeps);
    if (candidate.objective > refined.objective) refined = std::move(candidate);
  }
  return refined;
}

inline ReflectionVector optimize_reflection(const CMatrix& r, int mu,
                                            const OptimizerSettings& opt, RngStream& rng) {
  return optimize_reflection_full(r, mu, opt, rng).reflection;
}

struct RealizationContext {
  CirMatrix cir;
  AutocorrMatrix truth;
  MeasurementSet measurements;
};

inline RealizationContext make_realization(const Scenario& scenario, int measurement_count,
                                           MeasurementMode mode, int rs_count, int rs_symbols,
                                           std::uint64_t seed, int realization) {
  RngStream channel_rng(derive_seed(seed, "channel", static_cast<std::uint64_t>(realization)));
  RngStream reflection_rng(
      derive_seed(seed, "reflections", static_cast<std::uint64_t>(realization)));
  RngStream noise_rng(derive_seed(seed, "measurement", static_cast<std::uint64_t>(realization)));

  RealizationContext ctx;
  const ChannelRealization channel = sample_channel(scenario, 0, channel_rng);
  ctx.cir = build_cir_matrix(channel, scenario.subcarrier_count);
  ctx.truth = autocorrelation(ctx.cir, scenario.tx_power_watts());
  if (mode == MeasurementMode::exact) {
    ctx.measurements = collect_exact(measurement_count, ctx.truth, scenario.noise_power_watts(),
                                     scenario.phase_bits, reflection_rng);
  } else {
    const RsPattern pattern(scenario.subcarrier_count, rs_count, rs_symbols);
    ctx.measurements =
        collect_sampled(measurement_count, ctx.cir, pattern, scenario.tx_power_watts(),
                        scenario.noise_power_watts(), scenario.phase_bits, reflection_rng,
                        noise_rng);
  }
  return ctx;
}

inline TrainConfig training_for_realization(const Scenario& scenario, const SweepSpec& spec,
                                            int realization) {
  TrainConfig cfg = spec.training;
  cfg.seed = derive_seed(spec.seed, "train", static_cast<std::uint64_t>(realization));
  if (cfg.max_subnetworks <= 0)
    cfg.max_subnetworks =
        std::min(scenario.element_count() + 1, scenario.subcarrier_count);
  return cfg;
}

inline EstimatedAutocorr estimate_for_method(const Scenario& scenario, const SweepSpec& spec,
                                             const RealizationContext& ctx, Method method,
                                             int realization) {
  const TrainConfig cfg = training_for_realization(scenario, spec, realization);
  switch (method) {
    case Method::proposed:
      return reconstruct_autocorrelation(progressive_train(ctx.measurements, cfg).first);
    case Method::rank_one:
      return reconstruct_autocorrelation(train_with_fixed_rank(ctx.measurements, cfg, 1).first);
    case Method::true_rank:
      return reconstruct_autocorrelation(
          train_with_fixed_rank(ctx.measurements, cfg, scenario.max_taps()).first);
    default:
      throw std::invalid_argument("method " + to_string(method) +
                                  " does not produce an autocorrelation estimate");
  }
}

inline ReflectionVector reflection_for_method(const Scenario& scenario, const SweepSpec& spec,
                                              const RealizationContext& ctx, Method method,
                                              int realization) {
  RngStream optimizer_rng(
      derive_seed(spec.seed, "optimizer", static_cast<std::uint64_t>(realization)));
  switch (method) {
    case Method::proposed:
    case Method::rank_one:
    case Method::true_rank: {
      const EstimatedAutocorr estimate =
          estimate_for_method(scenario, spec, ctx, method, realization);
      return optimize_reflection(estimate.entries, scenario.phase_bits, spec.optimizer,
                                 optimizer_rng);
    }
    case Method::csm:
      return csm_baseline(ctx.measurements);
    case Method::rms:
      return rms_baseline(ctx.measurements);
    case Method::upper_bound:
      return optimize_reflection(ctx.truth.entries, scenario.phase_bits, spec.optimizer,
                                 optimizer_rng);
    case Method::no_irs:
      throw std::invalid_argument("no_irs is not a reflection-producing method");
  }
  throw std::logic_error("unreachable");
}

inline double evaluate_method(const Scenario& scenario, const SweepSpec& spec,
                              const RealizationContext& ctx, Method method, int realization) {
  if (spec.metric == SweepMetric::nmse) {
    const EstimatedAutocorr estimate =
        estimate_for_method(scenario, spec, ctx, method, realization);
    return nmse(estimate.entries, ctx.truth.entries);
  }

  CVector probe;
  if (method == Method::no_irs)
    probe = direct_only_vector(scenario.element_count());
  else
    probe = reflection_for_method(scenario, spec, ctx, method, realization).extended();

  switch (spec.metric) {
    case SweepMetric::gain:
      return std::real(probe.dot(ctx.truth.entries * probe)) / scenario.tx_power_watts();
    case SweepMetric::rate: {
      RateConfig rate_cfg{scenario.cp_length, scenario.tx_power_watts(),
                          scenario.noise_power_watts(), spec.allocation};
      return achievable_rate(ctx.cir, probe, rate_cfg);
    }
    default:
      throw std::invalid_argument("metric not supported in scalar evaluation");
  }
}

}  // namespace detail

/**
 * @brief Runs a Monte Carlo campaign over one axis (L, decay factor, or tap
 * index) and a method list, fully deterministic given the seed. Channel,
 * reflection and noise substreams depend only on the realization index, so
 * axis points are paired (same fading draws across axis values).
 */
inline SweepResult run_sweep(const Scenario& base_scenario, const SweepSpec& spec) {
  if (spec.realizations < 1)
    throw std::invalid_argument("run_sweep: need at least one realization");
  if (spec.methods.empty()) throw std::invalid_argument("run_sweep: no methods requested");
  if (spec.axis != SweepAxis::tap_index && spec.axis_values.empty())
    throw std::invalid_argument("run_sweep: no axis values");

  // samples[axis][method] -> per-realization metric values
  std::vector<double> axis_values = spec.axis_values;
  if (spec.axis == SweepAxis::tap_index) {
    axis_values.resize(static_cast<std::size_t>(base_scenario.max_taps()));
    for (std::size_t k = 0; k < axis_values.size(); ++k) axis_values[k] = static_cast<double>(k);
  }
  std::vector<std::vector<std::vector<double>>> samples(
      axis_values.size(),
      std::vector<std::vector<double>>(spec.methods.size()));

  for (int r = 0; r < spec.realizations; ++r) {
    if (spec.axis == SweepAxis::tap_index) {
      const auto ctx = detail::make_realization(base_scenario, spec.measurement_count, spec.mode,
                                                spec.rs_count, spec.rs_symbols, spec.seed, r);
      for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        CVector probe;
        if (spec.methods[mi] == Method::no_irs) {
          probe = direct_only_vector(base_scenario.element_count());
        } else {
          probe = detail::reflection_for_method(base_scenario, spec, ctx, spec.methods[mi], r)
                      .extended();
        }
        const RVector taps = per_tap_power(ctx.cir, probe);
        for (std::size_t k = 0; k < axis_values.size(); ++k)
          samples[k][mi].push_back(taps(static_cast<Eigen::Index>(k)));
      }
      continue;
    }

    for (std::size_t ai = 0; ai < axis_values.size(); ++ai) {
      Scenario scenario = base_scenario;
      int measurement_count = spec.measurement_count;
      if (spec.axis == SweepAxis::measurement_count)
        measurement_count = static_cast<int>(axis_values[ai]);
      else if (spec.axis == SweepAxis::decay_factor)
        scenario.decay_epsilon = axis_values[ai];

      const auto ctx =
          detail::make_realization(scenario, measurement_count, spec.mode, spec.rs_count,
                                   spec.rs_symbols, spec.seed, r);
      for (std::size_t mi = 0; mi < spec.methods.size(); ++mi)
        samples[ai][mi].push_back(
            detail::evaluate_method(scenario, spec, ctx, spec.methods[mi], r));
    }
  }

  SweepResult result;
  for (std::size_t ai = 0; ai < axis_values.size(); ++ai) {
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
      const auto& values = samples[ai][mi];
      const int count = static_cast<int>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= count;
      double variance = 0.0;
      for (double v : values) variance += (v - mean) * (v - mean);
      const double std_err = count > 1 ? std::sqrt(variance / (count - 1) / count) : 0.0;
      result.cells.push_back(
          {axis_values[ai], to_string(spec.methods[mi]), mean, std_err, count});
    }
  }
  return result;
}

}  // namespace irslab

#endif  // IRSLAB_EVALUATION_HPP
