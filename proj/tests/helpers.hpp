// SPDX-License-Identifier: Apache-2.0
//
// Shared test utilities. Oracles here are deliberately written as naive
// reimplementations (direct summation, exhaustive enumeration) independent of
// the library code paths they check.
#ifndef IRSLAB_TESTS_HELPERS_HPP
#define IRSLAB_TESTS_HELPERS_HPP

#include <cmath>
#include <vector>

#include "irslab/channel.hpp"
#include "irslab/common.hpp"
#include "irslab/reflection.hpp"

namespace irslab::test {

/// Random complex PSD matrix with the given rank and O(1) eigenvalues.
inline CMatrix random_psd(int dim, int rank, RngStream& rng) {
  CMatrix factors(dim, rank);
  for (int c = 0; c < rank; ++c)
    for (int r = 0; r < dim; ++r) factors(r, c) = rng.cnormal(1.0);
  CMatrix psd = factors * factors.adjoint();
  return 0.5 * (psd + psd.adjoint());
}

/// Random zero-padded CIR matrix with exactly the first `nonzero_rows` rows
/// populated, as produced by stacking direct and cascaded channels.
inline CMatrix random_cir_entries(int subcarriers, int columns, int nonzero_rows,
                                  RngStream& rng) {
  CMatrix g = CMatrix::Zero(subcarriers, columns);
  for (int r = 0; r < nonzero_rows; ++r)
    for (int c = 0; c < columns; ++c) g(r, c) = rng.cnormal(1.0);
  return g;
}

/// Naive O(M^2) DFT oracle.
inline CVector naive_dft(const CVector& taps) {
  const Eigen::Index m_total = taps.size();
  CVector out(m_total);
  for (Eigen::Index m = 0; m < m_total; ++m) {
    Complex acc(0.0, 0.0);
    for (Eigen::Index k = 0; k < m_total; ++k)
      acc += taps(k) * std::polar(1.0, -kTwoPi * static_cast<double>(m) *
                                           static_cast<double>(k) / static_cast<double>(m_total));
    out(m) = acc;
  }
  return out;
}

/// Exhaustive search over all (2^mu)^N feasible reflections; only for toy N.
inline std::pair<ReflectionVector, double> exhaustive_search(const CMatrix& r, int n_elements,
                                                             int mu) {
  const int n_phases = alphabet_size(mu);
  std::vector<int> indices(static_cast<std::size_t>(n_elements), 0);
  std::vector<int> best = indices;
  double best_value = -1.0;
  while (true) {
    ReflectionVector v(indices, mu);
    const double value = std::real(v.extended().dot(r * v.extended()));
    if (value > best_value) {
      best_value = value;
      best = indices;
    }
    int pos = 0;
    while (pos < n_elements) {
      if (++indices[static_cast<std::size_t>(pos)] < n_phases) break;
      indices[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n_elements) break;
  }
  return {ReflectionVector(best, mu), best_value};
}

}  // namespace irslab::test

#endif  // IRSLAB_TESTS_HELPERS_HPP
