// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_OPTIMIZER_HPP
#define IRSLAB_OPTIMIZER_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "irslab/common.hpp"
#include "irslab/estimator.hpp"
#include "irslab/measurement.hpp"
#include "irslab/reflection.hpp"

namespace irslab {

/// Average channel power gain v^H R v / P of a feasible reflection.
inline double objective_value(const ReflectionVector& v, const CMatrix& r, double tx_power_watts) {
  if (v.extended().size() != r.rows())
    throw std::invalid_argument("objective_value: dimension mismatch");
  const Complex quad = v.extended().dot(r * v.extended());
  if (std::abs(quad.imag()) > 1e-9 * (std::abs(quad.real()) + 1e-300))
    throw std::runtime_error("objective_value: quadratic form is not real; R is not Hermitian");
  return quad.real() / tx_power_watts;
}

struct OptimizationResult {
  ReflectionVector reflection;
  double objective;  // v^H R v / P
  int sweeps;
  std::string method;
};

/**
 * @brief Continuous relaxation plus Gaussian randomization.
 *
 * The diagonally-constrained relaxation of the quadratic maximization is
 * solved by low-rank factorization ascent: V = Z Z^H with unit-norm rows of Z
 * (rank ceil(sqrt(2(N+1)))), maximizing Tr(R Z Z^H) by projected gradient
 * steps of length 1/(2 ||R||_F) with row renormalization. Candidates are
 * drawn as Z xi with xi ~ CN(0, I), rotated so the leading entry has zero
 * phase, quantized to the discrete alphabet, and the best feasible candidate
 * is returned.
 */
inline ReflectionVector relax_and_randomize(const CMatrix& r, int mu, int num_candidates,
                                            RngStream& rng, int relax_rank = 0,
                                            int relax_iterations = 500) {
  const Eigen::Index dim = r.rows();
  if (dim < 2) throw std::invalid_argument("relax_and_randomize: need at least one element");
  if (num_candidates < 1)
    throw std::invalid_argument("relax_and_randomize: need at least one candidate");
  const int n_elements = static_cast<int>(dim) - 1;
  const int rank = relax_rank > 0
                       ? relax_rank
                       : static_cast<int>(std::ceil(std::sqrt(2.0 * static_cast<double>(dim))));

  CMatrix z(dim, rank);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) z(i, j) = rng.cnormal(1.0);
    const double norm = z.row(i).norm();
    if (norm > 0.0) z.row(i) /= norm;
  }

  const double fro = r.norm();
  if (fro > 0.0) {
    for (int it = 0; it < relax_iterations; ++it) {
      z += (r * z) / fro;  // ascent step 1/(2||R||_F) on gradient 2 R Z
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double norm = z.row(i).norm();
        if (norm > 0.0)
          z.row(i) /= norm;
        else
          z(i, 0) = Complex(1.0, 0.0);
      }
    }
  }

  std::vector<int> best_indices;
  double best_objective = -1.0;
  for (int c = 0; c < num_candidates; ++c) {
    CVector probe(rank);
    for (int j = 0; j < rank; ++j) probe(j) = rng.cnormal(1.0);
    CVector candidate = z * probe;
    const Complex lead = candidate(0);
    if (std::abs(lead) > 0.0) candidate *= std::polar(1.0, -std::arg(lead));

    std::vector<int> indices(static_cast<std::size_t>(n_elements));
    for (int n = 0; n < n_elements; ++n)
      indices[static_cast<std::size_t>(n)] = quantize_phase(std::arg(candidate(n + 1)), mu);
    ReflectionVector v(indices, mu);
    const double objective = std::real(v.extended().dot(r * v.extended()));
    if (objective > best_objective) {
      best_objective = objective;
      best_indices = std::move(indices);
    }
  }
  return ReflectionVector(std::move(best_indices), mu);
}

/**
 * @brief Successive refinement: cyclically re-optimizes each element over the
 * discrete alphabet with the others fixed, keeping the incumbent on ties, and
 * stops after the first sweep with no objective increase. The objective is
 * non-decreasing across every single-element update.
 */
inline OptimizationResult successive_refine(const ReflectionVector& v0, const CMatrix& r,
                                            double tx_power_watts = 1.0, int max_sweeps = 100,
                                            std::vector<double>* update_trajectory = nullptr) {
  const Eigen::Index dim = r.rows();
  if (v0.extended().size() != dim)
    throw std::invalid_argument("successive_refine: dimension mismatch");
  const int mu = v0.mu();
  const int n_phases = alphabet_size(mu);
  std::vector<Complex> units(static_cast<std::size_t>(n_phases));
  for (int i = 0; i < n_phases; ++i) units[static_cast<std::size_t>(i)] = alphabet_unit(i, mu);

  std::vector<int> indices = v0.indices();
  CVector v = v0.extended();
  CVector rv = r * v;
  double objective = std::real(v.dot(rv));

  int sweeps = 0;
  bool improved = true;
  while (improved && sweeps < max_sweeps) {
    improved = false;
    for (int n = 1; n < dim; ++n) {
      const Complex current = v(n);
      const Complex cross = rv(n) - r(n, n) * current;
      // With |c| fixed at 1, the objective depends on c only through
      // 2 Re(conj(c) * cross); candidates scan in increasing phase order so
      // the smallest improving phase wins and the incumbent survives ties.
      const double incumbent = std::real(std::conj(current) * cross);
      double best_value = incumbent;
      int best_index = indices[static_cast<std::size_t>(n - 1)];
      for (int i = 0; i < n_phases; ++i) {
        const double value = std::real(std::conj(units[static_cast<std::size_t>(i)]) * cross);
        if (value > best_value) {
          best_value = value;
          best_index = i;
        }
      }
      if (best_index != indices[static_cast<std::size_t>(n - 1)]) {
        const Complex next = units[static_cast<std::size_t>(best_index)];
        rv += r.col(n) * (next - current);
        v(n) = next;
        indices[static_cast<std::size_t>(n - 1)] = best_index;
        objective += 2.0 * (best_value - incumbent);
        improved = true;
        if (update_trajectory) update_trajectory->push_back(objective);
      }
    }
    ++sweeps;
  }

  ReflectionVector refined(std::move(indices), mu);
  const double final_objective = objective_value(refined, r, tx_power_watts);
  return {std::move(refined), final_objective, sweeps, "successive_refine"};
}

/// Random-max sampling baseline: the measured reflection with the highest
/// RSRP; ties resolve to the lowest record index.
inline ReflectionVector rms_baseline(const MeasurementSet& set) {
  if (set.records.empty()) throw std::invalid_argument("rms_baseline: empty measurement set");
  std::size_t best = 0;
  for (std::size_t l = 1; l < set.records.size(); ++l)
    if (set.records[l].rsrp > set.records[best].rsrp) best = l;
  return set.records[best].reflection;
}

/**
 * @brief Conditional sample mean baseline: per element, picks the phase whose
 * conditional RSRP mean is largest (ties to the smallest phase). Requires
 * every (element, phase) bin to be hit by at least one measurement.
 */
inline ReflectionVector csm_baseline(const MeasurementSet& set) {
  if (set.records.empty()) throw std::invalid_argument("csm_baseline: empty measurement set");
  const int n_elements = set.element_count;
  const int n_phases = alphabet_size(set.mu);
  RMatrix sums = RMatrix::Zero(n_elements, n_phases);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(n_elements, n_phases);
  for (const auto& record : set.records) {
    const auto& indices = record.reflection.indices();
    for (int n = 0; n < n_elements; ++n) {
      sums(n, indices[static_cast<std::size_t>(n)]) += record.rsrp;
      counts(n, indices[static_cast<std::size_t>(n)]) += 1;
    }
  }

  std::vector<int> selected(static_cast<std::size_t>(n_elements));
  for (int n = 0; n < n_elements; ++n) {
    int best = -1;
    double best_mean = 0.0;
    for (int i = 0; i < n_phases; ++i) {
      if (counts(n, i) == 0)
        throw std::invalid_argument(
            "csm_baseline: empty conditional bin for element " + std::to_string(n) +
            ", phase index " + std::to_string(i) + "; not enough measurements for the alphabet");
      const double mean = sums(n, i) / counts(n, i);
      if (best < 0 || mean > best_mean) {
        best = i;
        best_mean = mean;
      }
    }
    selected[static_cast<std::size_t>(n)] = best;
  }
  return ReflectionVector(std::move(selected), set.mu);
}

/// Entry-wise mean of per-user autocorrelation estimates; a convex combination
/// of Hermitian PSD matrices, hence Hermitian PSD.
inline CMatrix multiuser_average(const std::vector<EstimatedAutocorr>& estimates) {
  if (estimates.empty()) throw std::invalid_argument("multiuser_average: empty list");
  CMatrix mean = estimates.front().entries;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    if (estimates[i].entries.rows() != mean.rows() || estimates[i].entries.cols() != mean.cols())
      throw std::invalid_argument("multiuser_average: dimension mismatch");
    mean += estimates[i].entries;
  }
  return mean / static_cast<double>(estimates.size());
}

}  // namespace irslab

#endif  // IRSLAB_OPTIMIZER_HPP
