// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_SCENARIO_HPP
#define IRSLAB_SCENARIO_HPP

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "irslab/common.hpp"

namespace irslab {

/**
 * @brief Static description of one IRS-assisted OFDM deployment.
 *
 * Geometry is a 3D Cartesian frame in meters with the IRS parallel to the
 * y-z plane; the reference element sits at irs_reference_position and element
 * (row r, column c) is displaced by element_spacing wavelengths along (0, c, r).
 * Powers are configured in dBm and converted to watts on access.
 */
struct Scenario {
  Vec3 bs_position{35.0, -20.0, 15.0};
  Vec3 irs_reference_position{-2.0, -1.0, 0.0};
  std::vector<Vec3> user_positions{Vec3(0.0, 1.0, 0.0)};

  int array_rows = 4;
  int array_cols = 8;
  double element_spacing = 0.5;  // fraction of wavelength

  int subcarrier_count = 128;  // M
  int taps_direct = 4;         // K1
  int taps_bs_irs = 4;         // K2
  int taps_irs_user = 3;       // K3

  double decay_epsilon = 2.0;
  double rician_kappa_db = 7.0;
  double tx_power_dbm = 30.0;
  double noise_power_dbm = -90.0;
  int phase_bits = 2;  // mu
  int cp_length = 16;  // M_cp

  int element_count() const { return array_rows * array_cols; }
  int cascaded_taps() const { return taps_bs_irs + taps_irs_user - 1; }  // Kr
  int max_taps() const { return std::max(taps_direct, cascaded_taps()); }  // K
  double tx_power_watts() const { return dbm_to_watts(tx_power_dbm); }
  double noise_power_watts() const { return dbm_to_watts(noise_power_dbm); }

  void validate() const {
    if (array_rows < 1 || array_cols < 1)
      throw std::invalid_argument("scenario: array dimensions must be positive");
    if (element_count() < 1) throw std::invalid_argument("scenario: need at least one element");
    if (taps_direct < 1 || taps_bs_irs < 1 || taps_irs_user < 1)
      throw std::invalid_argument("scenario: tap counts must be at least 1");
    if (subcarrier_count <= max_taps())
      throw std::invalid_argument("scenario: M must exceed max(K1, K2+K3-1)");
    if (cp_length < max_taps() - 1)
      throw std::invalid_argument("scenario: M_cp must cover the delay spread");
    if (element_spacing <= 0.0)
      throw std::invalid_argument("scenario: element_spacing must be positive");
    if (phase_bits < 1) throw std::invalid_argument("scenario: mu must be at least 1");
    if (user_positions.empty())
      throw std::invalid_argument("scenario: at least one user position required");
  }
};

}  // namespace irslab

#endif  // IRSLAB_SCENARIO_HPP
