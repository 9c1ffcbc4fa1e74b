// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_REFLECTION_HPP
#define IRSLAB_REFLECTION_HPP

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "irslab/common.hpp"

namespace irslab {

/// Number of discrete phases for mu control bits.
inline int alphabet_size(int mu) {
  if (mu < 1) throw std::invalid_argument("phase alphabet requires mu >= 1");
  return 1 << mu;
}

/// Phase grid step omega = 2*pi / 2^mu.
inline double alphabet_step(int mu) { return kTwoPi / alphabet_size(mu); }

/// Phase value of alphabet index i in 0..2^mu-1, i.e. (i+1)*omega in (0, 2*pi].
inline double alphabet_phase(int index, int mu) { return (index + 1) * alphabet_step(mu); }

inline Complex alphabet_unit(int index, int mu) {
  return std::polar(1.0, alphabet_phase(index, mu));
}

/// Nearest alphabet index to an arbitrary angle (circular distance); exact
/// ties resolve to the smaller phase value.
inline int quantize_phase(double angle, int mu) {
  const int size = alphabet_size(mu);
  const double step = alphabet_step(mu);
  const double grid = angle / step;
  const double lower = std::floor(grid);
  const int k = (grid - lower > 0.5) ? static_cast<int>(lower) + 1 : static_cast<int>(lower);
  int wrapped = k % size;
  if (wrapped < 0) wrapped += size;
  int index = wrapped == 0 ? size - 1 : wrapped - 1;
  if (grid - lower == 0.5) {
    // Tie between two grid points: pick the smaller phase value in (0, 2*pi].
    int other = (wrapped + 1) % size;
    int other_index = other == 0 ? size - 1 : other - 1;
    if (alphabet_phase(other_index, mu) < alphabet_phase(index, mu)) index = other_index;
  }
  return index;
}

/**
 * @brief Discrete IRS reflection pattern with the leading-one convention.
 *
 * Stores one alphabet index per reflecting element; the extended complex
 * vector [1, e^{j theta_1}, ..., e^{j theta_N}] is cached at construction so
 * index space stays the single source of truth.
 */
class ReflectionVector {
 public:
  ReflectionVector(std::vector<int> indices, int mu)
      : indices_(std::move(indices)), mu_(mu) {
    const int size = alphabet_size(mu);
    for (int idx : indices_)
      if (idx < 0 || idx >= size)
        throw std::invalid_argument("reflection index outside phase alphabet");
    extended_.resize(static_cast<Eigen::Index>(indices_.size()) + 1);
    extended_(0) = Complex(1.0, 0.0);
    for (std::size_t n = 0; n < indices_.size(); ++n)
      extended_(static_cast<Eigen::Index>(n) + 1) = alphabet_unit(indices_[n], mu_);
  }

  int element_count() const { return static_cast<int>(indices_.size()); }
  int mu() const { return mu_; }
  const std::vector<int>& indices() const { return indices_; }
  double phase(int element) const { return alphabet_phase(indices_.at(element), mu_); }
  const CVector& extended() const { return extended_; }

 private:
  std::vector<int> indices_;
  int mu_;
  CVector extended_;
};

/// Uniformly random phase per element, independent across elements and calls.
inline ReflectionVector random_reflection(int element_count, int mu, RngStream& rng) {
  const int size = alphabet_size(mu);
  std::vector<int> indices(static_cast<std::size_t>(element_count));
  for (auto& idx : indices) idx = static_cast<int>(rng.uniform_int(size));
  return ReflectionVector(std::move(indices), mu);
}

/// Reflection with all elements at the first alphabet phase (omega).
inline ReflectionVector uniform_reflection(int element_count, int mu, int index = 0) {
  return ReflectionVector(std::vector<int>(static_cast<std::size_t>(element_count), index), mu);
}

}  // namespace irslab

#endif  // IRSLAB_REFLECTION_HPP
