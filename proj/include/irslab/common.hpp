// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_COMMON_HPP
#define IRSLAB_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace irslab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

/// Thrown when an iterative routine produces non-finite values.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed input files; carries file/line context in the message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All internal arithmetic is in linear watts; dB/dBm only at the interfaces.
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Derives an independent child seed from a master seed, a stream label and an
/// index, so that experiment stages (channel, symbols, noise, init, ...) can be
/// re-run independently without perturbing each other.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index = 0) {
  return splitmix64(master ^ fnv1a64(stream) ^ splitmix64(0x9e3779b97f4a7c15ull * (index + 1)));
}

/**
 * @brief Deterministic random stream with fully specified sampling.
 *
 * Wraps mt19937_64 but generates uniforms and normals itself (53-bit uniform,
 * Box-Muller) so that output sequences do not depend on the standard library's
 * distribution implementations.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = kTwoPi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex cnormal(double variance) {
    const double scale = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return Complex(re * scale, im * scale);
  }

  /// Unbiased uniform integer in [0, bound).
  std::uint64_t uniform_int(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_int: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace irslab

#endif  // IRSLAB_COMMON_HPP
