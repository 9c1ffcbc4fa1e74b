// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_MEASUREMENT_HPP
#define IRSLAB_MEASUREMENT_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "irslab/channel.hpp"
#include "irslab/common.hpp"
#include "irslab/reflection.hpp"

namespace irslab {

/**
 * @brief Uniform reference-signal placement: M0 RS-bearing subcarriers with
 * constant spacing M/M0 (first index 0), measured over Q OFDM symbols.
 */
struct RsPattern {
  int subcarrier_count;  // M
  int rs_count;          // M0
  int symbol_count;      // Q

  RsPattern(int m, int m0, int q) : subcarrier_count(m), rs_count(m0), symbol_count(q) {
    if (m0 < 1 || m < 1) throw std::invalid_argument("rs pattern: M and M0 must be positive");
    if (m % m0 != 0) throw std::invalid_argument("rs pattern: M0 must divide M");
    if (q < 1) throw std::invalid_argument("rs pattern: Q must be positive");
  }

  int spacing() const { return subcarrier_count / rs_count; }
  std::vector<int> indices() const {
    std::vector<int> out(static_cast<std::size_t>(rs_count));
    for (int i = 0; i < rs_count; ++i) out[static_cast<std::size_t>(i)] = i * spacing();
    return out;
  }
};

/// Partial DFT matrix: rows of the M-point DFT matrix at the RS subcarriers.
inline CMatrix partial_dft(int subcarrier_count, int rs_count) {
  if (rs_count < 1 || subcarrier_count % rs_count != 0)
    throw std::invalid_argument("partial_dft: M0 must divide M");
  const int spacing = subcarrier_count / rs_count;
  CMatrix f(rs_count, subcarrier_count);
  for (int i = 0; i < rs_count; ++i) {
    const int m = i * spacing;
    for (int k = 0; k < subcarrier_count; ++k)
      f(i, k) = std::polar(1.0, -kTwoPi * m * k / subcarrier_count);
  }
  return f;
}

/// Noiseless-expectation RSRP: v^H R v + sigma^2. Valid as the subset-band
/// measurement whenever M0 >= K held when R was formed.
inline double rsrp_exact(const ReflectionVector& v, const AutocorrMatrix& r, double sigma2) {
  const double quad = r.quadratic_form(v.extended());
  if (quad < -1e-9 * (std::abs(r.entries.trace()) + 1e-300))
    throw std::runtime_error("rsrp_exact: negative received power, R is not PSD");
  return std::max(quad, 0.0) + sigma2;
}

/**
 * @brief Simulated RSRP over the RS grid: averages |x_m h_m + z_m(q)|^2 over
 * Q symbols and M0 subcarriers. RS symbols are unit-modulus with uniform
 * random phase and power P/M per resource element, redrawn each symbol;
 * noise is independent across (q, m).
 */
inline double rsrp_sampled(const ReflectionVector& v, const CirMatrix& cir,
                           const RsPattern& pattern, double tx_power_watts, double sigma2,
                           RngStream& rng) {
  if (pattern.subcarrier_count != cir.subcarrier_count())
    throw std::invalid_argument("rsrp_sampled: pattern does not match CIR matrix");
  const CVector response = cfr(cir, v.extended());
  const std::vector<int> rs = pattern.indices();
  const double symbol_amplitude = std::sqrt(tx_power_watts / pattern.subcarrier_count);

  double acc = 0.0;
  for (int q = 0; q < pattern.symbol_count; ++q) {
    std::vector<Complex> symbols(rs.size());
    for (auto& x : symbols) x = std::polar(symbol_amplitude, kTwoPi * rng.uniform());
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const Complex noise = rng.cnormal(sigma2);
      acc += std::norm(symbols[i] * response(rs[static_cast<std::size_t>(i)]) + noise);
    }
  }
  return acc / (static_cast<double>(pattern.symbol_count) * static_cast<double>(rs.size()));
}

enum class MeasurementMode { exact, sampled };

inline std::string to_string(MeasurementMode mode) {
  return mode == MeasurementMode::exact ? "exact" : "sampled";
}

inline MeasurementMode measurement_mode_from_string(const std::string& s) {
  if (s == "exact") return MeasurementMode::exact;
  if (s == "sampled") return MeasurementMode::sampled;
  throw std::invalid_argument("unknown measurement mode: " + s);
}

struct MeasurementRecord {
  ReflectionVector reflection;
  double rsrp;  // watts
};

/// Training labels: L pairs of (reflection, RSRP). This is the only contract
/// between the measurement and estimator stages.
struct MeasurementSet {
  std::vector<MeasurementRecord> records;
  double sigma2 = 0.0;
  MeasurementMode mode = MeasurementMode::exact;
  int element_count = 0;
  int mu = 1;

  std::size_t size() const { return records.size(); }
};

inline MeasurementSet collect_exact(int count, const AutocorrMatrix& r, double sigma2, int mu,
                                    RngStream& reflection_rng) {
  if (count < 1) throw std::invalid_argument("collect_exact: need at least one measurement");
  MeasurementSet set;
  set.sigma2 = sigma2;
  set.mode = MeasurementMode::exact;
  set.element_count = r.dim() - 1;
  set.mu = mu;
  set.records.reserve(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    ReflectionVector v = random_reflection(set.element_count, mu, reflection_rng);
    const double p = rsrp_exact(v, r, sigma2);
    set.records.push_back({std::move(v), p});
  }
  return set;
}

inline MeasurementSet collect_sampled(int count, const CirMatrix& cir, const RsPattern& pattern,
                                      double tx_power_watts, double sigma2, int mu,
                                      RngStream& reflection_rng, RngStream& measurement_rng) {
  if (count < 1) throw std::invalid_argument("collect_sampled: need at least one measurement");
  MeasurementSet set;
  set.sigma2 = sigma2;
  set.mode = MeasurementMode::sampled;
  set.element_count = cir.element_count();
  set.mu = mu;
  set.records.reserve(static_cast<std::size_t>(count));
  for (int l = 0; l < count; ++l) {
    ReflectionVector v = random_reflection(set.element_count, mu, reflection_rng);
    const double p = rsrp_sampled(v, cir, pattern, tx_power_watts, sigma2, measurement_rng);
    set.records.push_back({std::move(v), p});
  }
  return set;
}

}  // namespace irslab

#endif  // IRSLAB_MEASUREMENT_HPP
