// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_ESTIMATOR_HPP
#define IRSLAB_ESTIMATOR_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "irslab/common.hpp"
#include "irslab/measurement.hpp"

namespace irslab {

/**
 * @brief Structured single-layer network predicting received power.
 *
 * Each of the K' subnetworks carries one complex weight vector w_k; the
 * prediction for a reflection v is sum_k |v^H w_k|^2, so the network output
 * is the quadratic form of the rank-K' PSD matrix sum_k w_k w_k^H. The real
 * 2x2-block layout (weights [[w1, w2], [w2, -w1]]) is implied by storing only
 * the complex vectors, which keeps the tied blocks consistent by construction.
 */
struct NnModel {
  CMatrix weights;  // (N+1) x K', column k = w_k

  int dim() const { return static_cast<int>(weights.rows()); }
  int subnetwork_count() const { return static_cast<int>(weights.cols()); }
};

/// Real-valued weight matrix of one subnetwork, the (2N+2) x 2 block form.
inline RMatrix subnetwork_real_block(const NnModel& model, int k) {
  const Eigen::Index dim = model.weights.rows();
  RMatrix block(2 * dim, 2);
  block.col(0).head(dim) = model.weights.col(k).real();
  block.col(0).tail(dim) = model.weights.col(k).imag();
  block.col(1).head(dim) = model.weights.col(k).imag();
  block.col(1).tail(dim) = -model.weights.col(k).real();
  return block;
}

/// Network output sum_k |v^H w_k|^2 for one reflection; always real and >= 0.
inline double forward(const NnModel& model, const CVector& reflection_extended) {
  if (reflection_extended.size() != model.weights.rows())
    throw std::invalid_argument("forward: reflection dimension does not match weights");
  return (model.weights.adjoint() * reflection_extended).squaredNorm();
}

inline double forward(const NnModel& model, const ReflectionVector& v) {
  return forward(model, v.extended());
}

namespace detail {

/// Measurement set unpacked for batched regression: row l of `reflections`
/// is v_l^T and labels are the noise-free targets in the set's power units.
struct RegressionData {
  CMatrix reflections;  // L x (N+1)
  RVector labels;       // p_bar - sigma2

  Eigen::Index count() const { return labels.size(); }
};

inline RegressionData make_regression_data(const MeasurementSet& set,
                                           const std::vector<int>& record_indices,
                                           double sigma2, double scale) {
  RegressionData data;
  const Eigen::Index count = static_cast<Eigen::Index>(record_indices.size());
  const Eigen::Index dim = set.element_count + 1;
  data.reflections.resize(count, dim);
  data.labels.resize(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& record = set.records[static_cast<std::size_t>(record_indices[i])];
    data.reflections.row(i) = record.reflection.extended().transpose();
    data.labels(i) = (record.rsrp - sigma2) / scale;
  }
  return data;
}

/// Per-record inner products c_{l,k} = v_l^H w_k.
inline CMatrix inner_products(const CMatrix& weights, const RegressionData& data) {
  return data.reflections.conjugate() * weights;
}

inline RVector predictions(const CMatrix& weights, const RegressionData& data) {
  return inner_products(weights, data).rowwise().squaredNorm();
}

inline double mse(const CMatrix& weights, const RegressionData& data) {
  return (predictions(weights, data) - data.labels).squaredNorm() /
         static_cast<double>(data.count());
}

/// Complex-form loss gradient: column k is (4/L1) sum_l rho_l c_{l,k} v_l,
/// whose real and imaginary parts are the derivatives with respect to the
/// free parameter vectors w_{k,1} and w_{k,2}.
inline CMatrix mse_gradient(const CMatrix& weights, const RegressionData& data) {
  const CMatrix products = inner_products(weights, data);
  const RVector residual = products.rowwise().squaredNorm() - data.labels;
  const double factor = 4.0 / static_cast<double>(data.count());
  return factor * (data.reflections.transpose() * (residual.asDiagonal() * products));
}

inline std::vector<int> all_indices(std::size_t count) {
  std::vector<int> indices(count);
  std::iota(indices.begin(), indices.end(), 0);
  return indices;
}

}  // namespace detail

/// Training loss, Eq.-exact: (1/L1) sum_l (p_bar(v_l) - sigma2 - p_hat(v_l))^2.
inline double loss(const NnModel& model, const MeasurementSet& batch, double sigma2) {
  if (batch.records.empty()) throw std::invalid_argument("loss: empty batch");
  const auto data =
      detail::make_regression_data(batch, detail::all_indices(batch.size()), sigma2, 1.0);
  return detail::mse(model.weights, data);
}

/**
 * @brief Analytic loss gradient with respect to the 2N+2 free real weights of
 * each subnetwork, stacked as rows [d/dw_{k,1}; d/dw_{k,2}], one column per
 * subnetwork. The mirrored halves of the block layout are tied, so these are
 * the only parameters that receive gradients.
 */
inline RMatrix gradient(const NnModel& model, const MeasurementSet& batch, double sigma2) {
  if (batch.records.empty()) throw std::invalid_argument("gradient: empty batch");
  const auto data =
      detail::make_regression_data(batch, detail::all_indices(batch.size()), sigma2, 1.0);
  const CMatrix complex_grad = detail::mse_gradient(model.weights, data);
  RMatrix out(2 * model.weights.rows(), model.weights.cols());
  out.topRows(model.weights.rows()) = complex_grad.real();
  out.bottomRows(model.weights.rows()) = complex_grad.imag();
  return out;
}

struct TrainConfig {
  double alpha0 = 1e-3;          // initial learning rate
  double decay_per_iter = 0.005; // multiplicative rate decay per iteration
  int max_iterations = 200;      // T
  int tau = 1;                   // subnetwork increment
  double varsigma = 0.1;         // convergence threshold on |delta(K') - delta(K'-tau)|
  double train_fraction = 0.8;   // |train| / L
  double init_scale = 0.0;       // weight init std; <= 0 derives it from the data
  int max_subnetworks = 0;       // stop bound; <= 0 means N+1 (callers may pass min(N+1, M))
  int batch_size = 0;            // 0 = full batch (the printed update sums over all L1)
  bool sigma2_from_min_rsrp = false;  // fallback noise estimate when sigma2 is not trusted
  double sigma2_override = -1.0;      // < 0: use the measurement set's recorded value
  std::uint64_t seed = 1;
};

struct IterationLog {
  int iteration;
  double train_loss;
  double validation_mse;
};

struct StageReport {
  int subnetwork_count;               // K'
  double delta;                       // min validation MSE, Eq. (31)
  int best_iteration;                 // argmin iteration, Eq. (30)
  std::vector<IterationLog> trajectory;
  double wall_ms;
};

struct TrainReport {
  std::vector<StageReport> stages;
  int selected_subnetworks = 0;  // K*
  double selected_delta = 0.0;
  std::string stop_reason;       // "mse_converged" or "max_subnetworks"
  int train_count = 0;           // L1
  double normalization_scale = 1.0;
  double sigma2_used = 0.0;
};

namespace detail {

struct FixedKResult {
  CMatrix weights;  // best-by-validation weights W(K')
  double delta;     // Eq. (31)
  int best_iteration;
  std::vector<IterationLog> trajectory;
};

/**
 * @brief Full-batch gradient descent for a fixed subnetwork count.
 *
 * Runs up to T steps with per-iteration learning-rate decay, evaluates the
 * validation MSE after every step and returns the weights attaining the
 * minimum. T = 0 returns the initial weights with their validation MSE.
 */
inline FixedKResult train_fixed_k(const CMatrix& init, const RegressionData& train,
                                  const RegressionData& validation, const TrainConfig& cfg,
                                  RngStream* batch_rng = nullptr) {
  FixedKResult result;
  CMatrix weights = init;
  double best_delta = mse(weights, validation);
  CMatrix best_weights = weights;
  int best_iteration = 0;
  result.trajectory.push_back({0, mse(weights, train), best_delta});

  const bool minibatch = cfg.batch_size > 0 &&
                         cfg.batch_size < static_cast<int>(train.count()) &&
                         batch_rng != nullptr;
  bool have_best = cfg.max_iterations == 0;
  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const double alpha = cfg.alpha0 * std::pow(1.0 - cfg.decay_per_iter, t - 1);
    if (minibatch) {
      RegressionData batch;
      batch.reflections.resize(cfg.batch_size, train.reflections.cols());
      batch.labels.resize(cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i) {
        const auto pick = static_cast<Eigen::Index>(
            batch_rng->uniform_int(static_cast<std::uint64_t>(train.count())));
        batch.reflections.row(i) = train.reflections.row(pick);
        batch.labels(i) = train.labels(pick);
      }
      weights -= alpha * mse_gradient(weights, batch);
    } else {
      weights -= alpha * mse_gradient(weights, train);
    }

    const double train_loss = mse(weights, train);
    const double val_mse = mse(weights, validation);
    if (!std::isfinite(train_loss) || !std::isfinite(val_mse))
      throw TrainingError("training diverged at iteration " + std::to_string(t) +
                          " (learning rate " + std::to_string(alpha) + ")");
    result.trajectory.push_back({t, train_loss, val_mse});
    if (!have_best || val_mse < best_delta) {
      best_delta = val_mse;
      best_weights = weights;
      best_iteration = t;
      have_best = true;
    }
  }

  result.weights = std::move(best_weights);
  result.delta = best_delta;
  result.best_iteration = best_iteration;
  return result;
}

inline CMatrix random_weights(Eigen::Index dim, int columns, double std_dev, RngStream& rng) {
  CMatrix weights(dim, columns);
  for (int k = 0; k < columns; ++k)
    for (Eigen::Index j = 0; j < dim; ++j)
      weights(j, k) = Complex(rng.normal() * std_dev, rng.normal() * std_dev);
  return weights;
}

/// Warm start: the first columns are copied verbatim from the previous stage,
/// only the tau new subnetworks are randomized.
inline CMatrix stage_init(const CMatrix& previous, int subnetworks, double std_dev,
                          RngStream& rng) {
  CMatrix init(previous.rows(), subnetworks);
  init.leftCols(previous.cols()) = previous;
  const int fresh = subnetworks - static_cast<int>(previous.cols());
  init.rightCols(fresh) = random_weights(previous.rows(), fresh, std_dev, rng);
  return init;
}

inline double derive_init_scale(const RegressionData& train, int subnetworks) {
  const double mean_label = train.labels.mean();
  return std::sqrt(std::max(mean_label, 1e-30) /
                   (subnetworks * static_cast<double>(train.reflections.cols())));
}

struct PreparedData {
  RegressionData train;
  RegressionData validation;
  double scale;
  double sigma2;
  int train_count;
};

/// Shuffles records once by seed, splits L1 = clamp(ceil(f*L), 1, L-1) and
/// rescales labels by their mean so the loss is dimensionless regardless of
/// the physical power level.
inline PreparedData prepare_training_data(const MeasurementSet& set, const TrainConfig& cfg) {
  const int total = static_cast<int>(set.size());
  if (total < 2)
    throw std::invalid_argument("progressive_train: need at least 2 measurements for a split");

  double sigma2 = cfg.sigma2_override >= 0.0 ? cfg.sigma2_override : set.sigma2;
  if (cfg.sigma2_from_min_rsrp) {
    sigma2 = set.records.front().rsrp;
    for (const auto& record : set.records) sigma2 = std::min(sigma2, record.rsrp);
  }

  double mean_excess = 0.0;
  for (const auto& record : set.records) mean_excess += record.rsrp - sigma2;
  mean_excess /= total;
  const double scale = std::max(mean_excess, 1e-300);

  std::vector<int> order = all_indices(set.size());
  RngStream shuffle_rng(derive_seed(cfg.seed, "train-split"));
  for (int i = total - 1; i > 0; --i) {
    const int j = static_cast<int>(shuffle_rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  int train_count = static_cast<int>(std::ceil(cfg.train_fraction * total));
  train_count = std::clamp(train_count, 1, total - 1);
  const std::vector<int> train_indices(order.begin(), order.begin() + train_count);
  const std::vector<int> validation_indices(order.begin() + train_count, order.end());

  PreparedData prepared;
  prepared.train = make_regression_data(set, train_indices, sigma2, scale);
  prepared.validation = make_regression_data(set, validation_indices, sigma2, scale);
  prepared.scale = scale;
  prepared.sigma2 = sigma2;
  prepared.train_count = train_count;
  return prepared;
}

}  // namespace detail

struct FixedKTraining {
  NnModel model;
  double delta;
  int best_iteration;
  std::vector<IterationLog> trajectory;
};

/// Gradient-descent training at a fixed subnetwork count on an already fixed
/// train/validation split, in the power units the sets carry.
inline FixedKTraining train_fixed_k(const NnModel& init, const MeasurementSet& train,
                                    const MeasurementSet& validation, const TrainConfig& cfg) {
  if (train.records.empty() || validation.records.empty())
    throw std::invalid_argument("train_fixed_k: both splits must be non-empty");
  double sigma2 = cfg.sigma2_override >= 0.0 ? cfg.sigma2_override : train.sigma2;
  const auto train_data =
      detail::make_regression_data(train, detail::all_indices(train.size()), sigma2, 1.0);
  const auto val_data = detail::make_regression_data(
      validation, detail::all_indices(validation.size()), sigma2, 1.0);
  RngStream batch_rng(derive_seed(cfg.seed, "minibatch"));
  auto result = detail::train_fixed_k(init.weights, train_data, val_data, cfg, &batch_rng);
  return {NnModel{std::move(result.weights)}, result.delta, result.best_iteration,
          std::move(result.trajectory)};
}

/**
 * @brief Progressive training: grow the subnetwork count by tau, warm-starting
 * previously trained subnetworks, until the validation MSE plateaus or the
 * subnetwork budget min(N+1, M) is exhausted; then keep the stage with the
 * smallest validation MSE.
 *
 * Labels are internally rescaled by their mean (see TrainReport.normalization_scale);
 * reported losses and deltas are in those dimensionless units, while the
 * returned model predicts watts.
 */
inline std::pair<NnModel, TrainReport> progressive_train(const MeasurementSet& set,
                                                         const TrainConfig& cfg) {
  if (cfg.tau < 1) throw std::invalid_argument("progressive_train: tau must be at least 1");
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
    throw std::invalid_argument("progressive_train: train_fraction must be in (0, 1)");
  const auto prepared = detail::prepare_training_data(set, cfg);
  const Eigen::Index dim = set.element_count + 1;
  const int budget = cfg.max_subnetworks > 0 ? cfg.max_subnetworks : static_cast<int>(dim);

  RngStream init_rng(derive_seed(cfg.seed, "weight-init"));
  RngStream batch_rng(derive_seed(cfg.seed, "minibatch"));

  TrainReport report;
  report.train_count = prepared.train_count;
  report.normalization_scale = prepared.scale;
  report.sigma2_used = prepared.sigma2;

  std::vector<CMatrix> stage_weights;
  int subnetworks = cfg.tau;
  double previous_delta = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    const double std_dev = cfg.init_scale > 0.0
                               ? cfg.init_scale
                               : detail::derive_init_scale(prepared.train, subnetworks);
    CMatrix init = stage_weights.empty()
                       ? detail::random_weights(dim, subnetworks, std_dev, init_rng)
                       : detail::stage_init(stage_weights.back(), subnetworks, std_dev, init_rng);

    const auto start = std::chrono::steady_clock::now();
    auto stage =
        detail::train_fixed_k(init, prepared.train, prepared.validation, cfg, &batch_rng);
    const auto elapsed = std::chrono::steady_clock::now() - start;

    report.stages.push_back(
        {subnetworks, stage.delta, stage.best_iteration, std::move(stage.trajectory),
         std::chrono::duration<double, std::milli>(elapsed).count()});
    stage_weights.push_back(std::move(stage.weights));

    if (!std::isnan(previous_delta) &&
        std::abs(report.stages.back().delta - previous_delta) < cfg.varsigma) {
      report.stop_reason = "mse_converged";
      break;
    }
    if (subnetworks + cfg.tau > budget) {
      report.stop_reason = "max_subnetworks";
      break;
    }
    previous_delta = report.stages.back().delta;
    subnetworks += cfg.tau;
  }

  std::size_t best_stage = 0;
  for (std::size_t i = 1; i < report.stages.size(); ++i)
    if (report.stages[i].delta < report.stages[best_stage].delta) best_stage = i;
  report.selected_subnetworks = report.stages[best_stage].subnetwork_count;
  report.selected_delta = report.stages[best_stage].delta;

  NnModel model;
  model.weights = std::sqrt(prepared.scale) * stage_weights[best_stage];
  return {std::move(model), std::move(report)};
}

/// Single-stage variant used by the fixed-rank benchmark estimators
/// (rank-one approximation and true-rank training).
inline std::pair<NnModel, TrainReport> train_with_fixed_rank(const MeasurementSet& set,
                                                             const TrainConfig& cfg,
                                                             int subnetworks) {
  if (subnetworks < 1)
    throw std::invalid_argument("train_with_fixed_rank: need at least one subnetwork");
  const auto prepared = detail::prepare_training_data(set, cfg);
  const Eigen::Index dim = set.element_count + 1;
  RngStream init_rng(derive_seed(cfg.seed, "weight-init"));
  RngStream batch_rng(derive_seed(cfg.seed, "minibatch"));
  const double std_dev = cfg.init_scale > 0.0
                             ? cfg.init_scale
                             : detail::derive_init_scale(prepared.train, subnetworks);
  CMatrix init = detail::random_weights(dim, subnetworks, std_dev, init_rng);
  auto stage = detail::train_fixed_k(init, prepared.train, prepared.validation, cfg, &batch_rng);

  TrainReport report;
  report.train_count = prepared.train_count;
  report.normalization_scale = prepared.scale;
  report.sigma2_used = prepared.sigma2;
  report.stages.push_back({subnetworks, stage.delta, stage.best_iteration,
                           std::move(stage.trajectory), 0.0});
  report.selected_subnetworks = subnetworks;
  report.selected_delta = stage.delta;
  report.stop_reason = "fixed_rank";

  NnModel model;
  model.weights = std::sqrt(prepared.scale) * stage.weights;
  return {std::move(model), std::move(report)};
}

/// Rank-bounded estimate R_hat = sum_k w_k w_k^H, Hermitian PSD by construction.
struct EstimatedAutocorr {
  CMatrix entries;
  int rank_bound = 0;
};

inline EstimatedAutocorr reconstruct_autocorrelation(const NnModel& model) {
  EstimatedAutocorr estimate;
  estimate.entries = model.weights * model.weights.adjoint();
  estimate.entries = 0.5 * (estimate.entries + estimate.entries.adjoint()).eval();
  estimate.rank_bound = model.subnetwork_count();
  return estimate;
}

/// Frobenius-normalized squared estimation error.
inline double nmse(const CMatrix& estimate, const CMatrix& truth) {
  const double denom = truth.squaredNorm();
  if (denom <= 0.0) throw std::invalid_argument("nmse: reference matrix must be nonzero");
  return (estimate - truth).squaredNorm() / denom;
}

}  // namespace irslab

#endif  // IRSLAB_ESTIMATOR_HPP
