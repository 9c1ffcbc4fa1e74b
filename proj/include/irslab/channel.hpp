// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_CHANNEL_HPP
#define IRSLAB_CHANNEL_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "irslab/common.hpp"
#include "irslab/scenario.hpp"

namespace irslab {

enum class LinkType { direct, bs_irs, irs_user };

/// Distance-dependent path loss in dB: 33 + 37 log10(d) for the direct link,
/// 30 + 20 log10(d) for the BS-IRS and IRS-user links.
inline double path_loss_db(LinkType link, double distance_m) {
  if (distance_m <= 0.0) throw std::invalid_argument("path_loss_db: distance must be positive");
  const double log_d = std::log10(distance_m);
  return link == LinkType::direct ? 33.0 + 37.0 * log_d : 30.0 + 20.0 * log_d;
}

/// Exponentially decaying power delay profile, normalized to unit total power.
inline RVector power_delay_profile(int tap_count, double epsilon) {
  if (tap_count < 1) throw std::invalid_argument("power_delay_profile: need at least one tap");
  if (epsilon < 0.0) throw std::invalid_argument("power_delay_profile: decay must be nonnegative");
  RVector profile(tap_count);
  for (int k = 0; k < tap_count; ++k) profile(k) = std::exp(-epsilon * k);
  profile /= profile.sum();
  return profile;
}

/// Linear convolution of two tap vectors; result length is |a| + |b| - 1.
inline CVector convolve(const CVector& a, const CVector& b) {
  CVector out = CVector::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
  return out;
}

/**
 * @brief Per-link complex tap vectors for one coherence block.
 *
 * direct_taps is the BS-user channel (K1 taps); bs_irs_taps[n] and
 * irs_user_taps[n] hold the per-element BS-IRS (K2) and IRS-user (K3) taps,
 * and cascaded_taps[n] is their linear convolution (Kr = K2+K3-1 taps).
 */
struct ChannelRealization {
  CVector direct_taps;                     // f_bar
  std::vector<CVector> bs_irs_taps;        // q_n
  std::vector<CVector> irs_user_taps;      // b_n
  std::vector<CVector> cascaded_taps;      // g_bar_n = q_n * b_n

  int element_count() const { return static_cast<int>(cascaded_taps.size()); }
};

/// Deterministic per-element LoS steering phases toward a user, from UPA
/// geometry with spacing in wavelengths (the carrier wavelength cancels).
/// Element order is row-major: n = row * array_cols + col.
inline CVector los_steering(const Scenario& scenario, const Vec3& user_position) {
  const Vec3 direction = (user_position - scenario.irs_reference_position).normalized();
  CVector steering(scenario.element_count());
  for (int r = 0; r < scenario.array_rows; ++r) {
    for (int c = 0; c < scenario.array_cols; ++c) {
      const double path = scenario.element_spacing * (c * direction.y() + r * direction.z());
      steering(r * scenario.array_cols + c) = std::polar(1.0, -kTwoPi * path);
    }
  }
  return steering;
}

/**
 * @brief Draws one independent channel realization.
 *
 * BS-user and BS-IRS taps are i.i.d. Rayleigh with per-tap variance
 * 10^(-beta/10) * zeta_k. The IRS-user link is Rician: its first tap combines
 * a geometric LoS component (fraction kappa/(kappa+1) of the tap power) with a
 * Rayleigh part, remaining taps are Rayleigh; all scaled by the same profile
 * and path loss so per-tap second moments are profile-exact.
 */
inline ChannelRealization sample_channel(const Scenario& scenario, int user_index,
                                         RngStream& rng) {
  scenario.validate();
  if (user_index < 0 || user_index >= static_cast<int>(scenario.user_positions.size()))
    throw std::invalid_argument("sample_channel: user index out of range");
  const Vec3& user = scenario.user_positions[static_cast<std::size_t>(user_index)];

  const double d1 = (scenario.bs_position - user).norm();
  const double d2 = (scenario.bs_position - scenario.irs_reference_position).norm();
  const double d3 = (scenario.irs_reference_position - user).norm();
  const double gain1 = db_to_linear(-path_loss_db(LinkType::direct, d1));
  const double gain2 = db_to_linear(-path_loss_db(LinkType::bs_irs, d2));
  const double gain3 = db_to_linear(-path_loss_db(LinkType::irs_user, d3));

  const RVector profile1 = power_delay_profile(scenario.taps_direct, scenario.decay_epsilon);
  const RVector profile2 = power_delay_profile(scenario.taps_bs_irs, scenario.decay_epsilon);
  const RVector profile3 = power_delay_profile(scenario.taps_irs_user, scenario.decay_epsilon);

  const double kappa = db_to_linear(scenario.rician_kappa_db);
  const double los_fraction = kappa / (kappa + 1.0);
  const CVector steering = los_steering(scenario, user);

  const int n_elements = scenario.element_count();
  ChannelRealization realization;
  realization.direct_taps.resize(scenario.taps_direct);
  for (int k = 0; k < scenario.taps_direct; ++k)
    realization.direct_taps(k) = rng.cnormal(gain1 * profile1(k));

  realization.bs_irs_taps.resize(n_elements);
  realization.irs_user_taps.resize(n_elements);
  realization.cascaded_taps.resize(n_elements);
  for (int n = 0; n < n_elements; ++n) {
    CVector q(scenario.taps_bs_irs);
    for (int k = 0; k < scenario.taps_bs_irs; ++k) q(k) = rng.cnormal(gain2 * profile2(k));

    CVector b(scenario.taps_irs_user);
    const double tap1_power = gain3 * profile3(0);
    b(0) = std::sqrt(tap1_power * los_fraction) * steering(n) +
           rng.cnormal(tap1_power * (1.0 - los_fraction));
    for (int k = 1; k < scenario.taps_irs_user; ++k) b(k) = rng.cnormal(gain3 * profile3(k));

    realization.bs_irs_taps[n] = q;
    realization.irs_user_taps[n] = b;
    realization.cascaded_taps[n] = convolve(q, b);
  }
  return realization;
}

/**
 * @brief Zero-padded M x (N+1) CIR matrix: column 0 is the direct channel,
 * columns 1..N the cascaded per-element channels. Rows at and beyond
 * max(K1, Kr) are exactly zero.
 */
struct CirMatrix {
  CMatrix entries;
  int taps_direct = 0;    // K1
  int cascaded_taps = 0;  // Kr

  int subcarrier_count() const { return static_cast<int>(entries.rows()); }
  int element_count() const { return static_cast<int>(entries.cols()) - 1; }
  int max_taps() const { return std::max(taps_direct, cascaded_taps); }
};

inline CirMatrix build_cir_matrix(const ChannelRealization& realization, int subcarrier_count) {
  const int k1 = static_cast<int>(realization.direct_taps.size());
  const int n_elements = realization.element_count();
  if (n_elements < 1) throw std::invalid_argument("build_cir_matrix: empty realization");
  const int kr = static_cast<int>(realization.cascaded_taps[0].size());
  if (subcarrier_count < std::max(k1, kr))
    throw std::invalid_argument("build_cir_matrix: M must be at least max(K1, Kr)");

  CirMatrix cir;
  cir.taps_direct = k1;
  cir.cascaded_taps = kr;
  cir.entries = CMatrix::Zero(subcarrier_count, n_elements + 1);
  cir.entries.col(0).head(k1) = realization.direct_taps;
  for (int n = 0; n < n_elements; ++n) {
    if (realization.cascaded_taps[n].size() != kr)
      throw std::invalid_argument("build_cir_matrix: inconsistent cascaded tap counts");
    cir.entries.col(n + 1).head(kr) = realization.cascaded_taps[n];
  }
  return cir;
}

/// Unnormalized forward DFT of a tap vector, evaluated at all M subcarriers.
/// Only the first `nonzero_taps` entries of `taps` are used.
inline CVector dft_of_taps(const CVector& taps, int subcarrier_count, int nonzero_taps) {
  CVector response(subcarrier_count);
  for (int m = 0; m < subcarrier_count; ++m) {
    Complex acc(0.0, 0.0);
    for (int k = 0; k < nonzero_taps; ++k)
      acc += taps(k) * std::polar(1.0, -kTwoPi * m * k / subcarrier_count);
    response(m) = acc;
  }
  return response;
}

inline void validate_reflection_extended(const CVector& v, int expected_size) {
  if (v.size() != expected_size)
    throw std::invalid_argument("reflection vector has wrong length");
  if (std::abs(v(0) - Complex(1.0, 0.0)) > 1e-9)
    throw std::invalid_argument("reflection vector must have leading entry 1");
  for (Eigen::Index n = 1; n < v.size(); ++n)
    if (std::abs(std::abs(v(n)) - 1.0) > 1e-9)
      throw std::invalid_argument("reflection vector entries must be unit modulus");
}

/// Channel frequency response h = F_M G v over all subcarriers.
inline CVector cfr(const CirMatrix& cir, const CVector& reflection_extended) {
  validate_reflection_extended(reflection_extended, cir.element_count() + 1);
  const CVector superimposed = cir.entries * reflection_extended;
  return dft_of_taps(superimposed, cir.subcarrier_count(), cir.max_taps());
}

/**
 * @brief Hermitian PSD channel autocorrelation matrix R = (P/M) G^H G.
 *
 * Deterministic per realization; the expectation in the received-power
 * identity is over OFDM symbols only. rank(R) <= max(K1, Kr).
 */
struct AutocorrMatrix {
  CMatrix entries;
  double power_scale = 0.0;  // the P/M factor baked in

  int dim() const { return static_cast<int>(entries.rows()); }
  double quadratic_form(const CVector& v) const { return std::real(v.dot(entries * v)); }
};

inline AutocorrMatrix autocorrelation(const CirMatrix& cir, double tx_power_watts) {
  const int k = cir.max_taps();
  const auto active = cir.entries.topRows(k);
  AutocorrMatrix result;
  result.power_scale = tx_power_watts / cir.subcarrier_count();
  result.entries = result.power_scale * (active.adjoint() * active);
  result.entries = 0.5 * (result.entries + result.entries.adjoint()).eval();
  return result;
}

}  // namespace irslab

#endif  // IRSLAB_CHANNEL_HPP
