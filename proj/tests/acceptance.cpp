// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion, grouped so expensive
// campaigns can run as separate ctest entries. Exit code is the number of
// failed criteria.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "irslab/experiment.hpp"

using namespace irslab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Criterion 1: subset-band RSRP equals the full-band average received power
// whenever the delay spread fits the RS grid, to 1e-10 relative.
void check_subset_lemma() {
  RngStream rng(101);
  const int m_total = 128;
  const int m0 = 64;
  const CMatrix f_partial = partial_dft(m_total, m0);
  const double tx_power = 1.0;
  const double sigma2 = 1e-12;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform_int(6));
    const int n_elements = 4;
    CirMatrix cir;
    cir.entries = test::random_cir_entries(m_total, n_elements + 1, k, rng);
    cir.taps_direct = k;
    cir.cascaded_taps = k;
    const AutocorrMatrix r = autocorrelation(cir, tx_power);
    const ReflectionVector v = random_reflection(n_elements, 2, rng);

    const CVector gv = cir.entries * v.extended();
    const double subset =
        tx_power / (m0 * m_total) * (f_partial * gv).squaredNorm() + sigma2;
    const double full = rsrp_exact(v, r, sigma2);
    worst = std::max(worst, std::abs(subset - full) / full);
  }
  report(1, "subset-band RSRP equals full-band power", worst < 1e-10,
         "max rel err " + fmt(worst) + " over 100 instances, tol 1e-10");
}

// Criterion 2: analytic gradient vs central finite differences, 50 instances.
void check_gradient() {
  RngStream rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n_elements = 2 + static_cast<int>(rng.uniform_int(7));
    const int subnetworks = 1 + static_cast<int>(rng.uniform_int(3));
    const int dim = n_elements + 1;

    NnModel model;
    model.weights.resize(dim, subnetworks);
    for (int k = 0; k < subnetworks; ++k)
      for (int j = 0; j < dim; ++j) model.weights(j, k) = rng.cnormal(1.0);

    MeasurementSet set;
    set.sigma2 = 0.05;
    set.element_count = n_elements;
    set.mu = 2;
    const CMatrix truth = test::random_psd(dim, 2, rng);
    for (int l = 0; l < 8; ++l) {
      ReflectionVector v = random_reflection(n_elements, 2, rng);
      const double power = std::real(v.extended().dot(truth * v.extended()));
      set.records.push_back({std::move(v), power + set.sigma2});
    }

    const RMatrix analytic = gradient(model, set, set.sigma2);
    const double step = 1e-6;
    RMatrix numeric(2 * dim, subnetworks);
    for (int k = 0; k < subnetworks; ++k) {
      for (int j = 0; j < 2 * dim; ++j) {
        NnModel plus = model, minus = model;
        const int row = j < dim ? j : j - dim;
        const Complex delta = j < dim ? Complex(step, 0.0) : Complex(0.0, step);
        plus.weights(row, k) += delta;
        minus.weights(row, k) -= delta;
        numeric(j, k) =
            (loss(plus, set, set.sigma2) - loss(minus, set, set.sigma2)) / (2.0 * step);
      }
    }
    worst = std::max(worst, (analytic - numeric).norm() / numeric.norm());
  }
  report(2, "analytic gradient matches central differences", worst < 1e-5,
         "max rel err " + fmt(worst) + " over 50 instances, tol 1e-5");
}

// Criterion 3: network output equals the quadratic form of sum_k w_k w_k^H.
void check_representation() {
  RngStream rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 3 + static_cast<int>(rng.uniform_int(8));
    const int subnetworks = 1 + static_cast<int>(rng.uniform_int(4));
    NnModel model;
    model.weights.resize(dim, subnetworks);
    for (int k = 0; k < subnetworks; ++k)
      for (int j = 0; j < dim; ++j) model.weights(j, k) = rng.cnormal(1.0);
    const CMatrix gram = model.weights * model.weights.adjoint();
    const ReflectionVector v = random_reflection(dim - 1, 2, rng);
    const double direct = forward(model, v);
    const double quad = std::real(v.extended().dot(gram * v.extended()));
    worst = std::max(worst, std::abs(direct - quad) / std::max(quad, 1e-300));
  }
  report(3, "forward output equals the reconstructed quadratic form", worst < 1e-12,
         "max rel err " + fmt(worst) + " over 100 instances, tol 1e-12");
}

// Criteria 4 and 5: planted rank-3 recovery with progressive training.
void check_planted_recovery() {
  RngStream rng(404);
  const int dim = 17;  // N = 16
  // Rank-3 PSD with comparable eigenvalues so every stage is informative.
  CMatrix basis(dim, 3);
  for (int c = 0; c < 3; ++c)
    for (int j = 0; j < dim; ++j) basis(j, c) = rng.cnormal(1.0);
  const Eigen::HouseholderQR<CMatrix> qr(basis);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(dim, 3);
  RVector eigenvalues(3);
  eigenvalues << 1.2, 1.0, 0.8;
  CMatrix truth = CMatrix::Zero(dim, dim);
  for (int c = 0; c < 3; ++c)
    truth += eigenvalues(c) * (q.col(c) * q.col(c).adjoint());
  truth = 0.5 * (truth + truth.adjoint()).eval();

  MeasurementSet set;
  set.sigma2 = 0.0;
  set.mode = MeasurementMode::exact;
  set.element_count = dim - 1;
  set.mu = 2;
  for (int l = 0; l < 600; ++l) {
    ReflectionVector v = random_reflection(dim - 1, 2, rng);
    const double power = std::real(v.extended().dot(truth * v.extended()));
    set.records.push_back({std::move(v), power});
  }

  TrainConfig cfg;
  cfg.alpha0 = 2e-2;
  cfg.decay_per_iter = 0.001;
  cfg.max_iterations = 2500;
  cfg.tau = 1;
  cfg.varsigma = 0.02;
  cfg.seed = 99;
  auto [model, train_report] = progressive_train(set, cfg);
  const double error = nmse(reconstruct_autocorrelation(model).entries, truth);
  const int k_star = train_report.selected_subnetworks;

  const bool pass4 = error < 5e-2 && (k_star == 3 || k_star == 4);
  report(4, "planted rank-3 recovery", pass4,
         "NMSE " + fmt(error) + " (tol 5e-2), K* = " + std::to_string(k_star) +
             " (expected 3 or 4)");

  const auto delta_at = [&](int k) -> double {
    for (const auto& stage : train_report.stages)
      if (stage.subnetwork_count == k) return stage.delta;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double d1 = delta_at(1), d3 = delta_at(3), d4 = delta_at(4);
  const bool pass5 = std::isfinite(d1) && std::isfinite(d3) && std::isfinite(d4) &&
                     d3 < 0.1 * d1 && std::abs(d4 - d3) < cfg.varsigma;
  report(5, "validation MSE drops sharply up to the true rank", pass5,
         "delta(1) " + fmt(d1) + ", delta(3) " + fmt(d3) + ", delta(4) " + fmt(d4) +
             ", threshold " + fmt(cfg.varsigma));
}

// Criterion 6: toy-scale optimality of relaxation + refinement.
void check_toy_optimality() {
  RngStream rng(606);
  int optimal = 0;
  bool monotone = true;
  const int instances = 200;
  OptimizerSettings opt;
  opt.num_candidates = 100;
  opt.multi_start = 10;
  for (int t = 0; t < instances; ++t) {
    const CMatrix r = test::random_psd(7, 3, rng);
    const auto [best, best_value] = test::exhaustive_search(r, 6, 1);

    RngStream opt_rng(7000 + t);
    const ReflectionVector start = relax_and_randomize(r, 1, opt.num_candidates, opt_rng);
    std::vector<double> trajectory;
    const OptimizationResult refined = successive_refine(start, r, 1.0, 100, &trajectory);
    double previous = std::real(start.extended().dot(r * start.extended()));
    for (double value : trajectory) {
      if (value < previous) monotone = false;
      previous = value;
    }

    double found = refined.objective;
    for (int s = 1; s < opt.multi_start; ++s) {
      const ReflectionVector v0 = random_reflection(6, 1, opt_rng);
      found = std::max(found, successive_refine(v0, r, 1.0, 100).objective);
    }
    if (found >= best_value * (1.0 - 1e-12)) ++optimal;
  }
  const bool pass = optimal >= 190 && monotone;
  report(6, "toy-scale exhaustive optimality", pass,
         std::to_string(optimal) + "/200 optimal (need >= 190), updates " +
             (monotone ? "monotone" : "non-monotone"));
}

SweepSpec section_v_spec(const ExperimentConfig& cfg) {
  SweepSpec spec = make_sweep_spec(cfg);
  return spec;
}

// Criterion 7: desk-scale mean-gain ordering and gap to the perfect-CSI bound.
void check_method_ordering() {
  ExperimentConfig cfg;  // reference scenario: N = 32, mu = 2
  cfg.preset = "gain_vs_L";
  cfg.measurement_count = 300;
  cfg.axis_values = {300.0};
  cfg.methods = {Method::proposed, Method::csm, Method::rms, Method::upper_bound};
  cfg.realizations = 50;
  cfg.mode = MeasurementMode::exact;
  cfg.seed = 7;
  cfg.training.alpha0 = 1e-2;
  cfg.training.decay_per_iter = 0.002;
  cfg.training.max_iterations = 800;
  cfg.training.varsigma = 0.02;

  const SweepResult result = run_sweep(cfg.scenario, section_v_spec(cfg));
  std::map<std::string, double> mean;
  for (const auto& cell : result.cells) mean[cell.method] = cell.mean;

  const double proposed = mean.at("proposed");
  const double csm = mean.at("csm");
  const double rms = mean.at("rms");
  const double upper = mean.at("upper_bound");
  const bool pass = proposed >= csm && csm >= rms && proposed >= 0.85 * upper;
  report(7, "mean-gain ordering proposed >= CSM >= RMS, within 15% of the bound", pass,
         "proposed " + fmt(proposed) + ", csm " + fmt(csm) + ", rms " + fmt(rms) +
             ", upper " + fmt(upper) + ", ratio " + fmt(proposed / upper));
}

// Criterion 8: estimation NMSE strictly decreases in L beyond one standard error.
void check_nmse_trend() {
  ExperimentConfig cfg;
  cfg.preset = "nmse_vs_L";
  cfg.axis_values = {100.0, 200.0, 300.0};
  cfg.methods = {Method::proposed};
  cfg.realizations = 30;
  cfg.mode = MeasurementMode::exact;
  cfg.seed = 8;
  cfg.training.alpha0 = 1e-2;
  cfg.training.decay_per_iter = 0.002;
  cfg.training.max_iterations = 800;
  cfg.training.varsigma = 0.02;

  const SweepResult result = run_sweep(cfg.scenario, section_v_spec(cfg));
  std::vector<double> means, errs;
  for (const auto& cell : result.cells) {
    means.push_back(cell.mean);
    errs.push_back(cell.std_err);
  }
  bool pass = means.size() == 3;
  std::string detail;
  for (std::size_t i = 0; pass && i + 1 < means.size(); ++i) {
    const double combined = std::sqrt(errs[i] * errs[i] + errs[i + 1] * errs[i + 1]);
    if (!(means[i] - means[i + 1] > combined)) pass = false;
  }
  for (std::size_t i = 0; i < means.size(); ++i)
    detail += (i ? ", " : "") + std::string("L") + fmt(100.0 * (i + 1)) + ": " + fmt(means[i]) +
              " +- " + fmt(errs[i]);
  report(8, "NMSE decreases with L beyond one standard error", pass, detail);
}

// Criterion 9: optimized IRS activates the extra cascaded taps and lifts every tap.
void check_extra_taps() {
  ExperimentConfig cfg;
  cfg.preset = "tap_power";
  cfg.measurement_count = 350;
  cfg.methods = {Method::proposed, Method::no_irs};
  cfg.realizations = 50;
  cfg.mode = MeasurementMode::exact;
  cfg.seed = 9;
  cfg.training.alpha0 = 1e-2;
  cfg.training.decay_per_iter = 0.002;
  cfg.training.max_iterations = 500;
  cfg.training.varsigma = 0.02;

  const SweepResult result = run_sweep(cfg.scenario, section_v_spec(cfg));
  std::map<int, std::map<std::string, double>> by_tap;
  for (const auto& cell : result.cells)
    by_tap[static_cast<int>(cell.axis_value)][cell.method] = cell.mean;

  const int k1 = cfg.scenario.taps_direct;
  const int k_total = cfg.scenario.max_taps();
  bool extra_active = true;
  bool dominates = true;
  for (int k = 0; k < k_total; ++k) {
    const double with_irs = by_tap.at(k).at("proposed");
    const double without = by_tap.at(k).at("no_irs");
    if (k >= k1 && with_irs <= 0.0) extra_active = false;
    if (with_irs <= without) dominates = false;
  }
  report(9, "extra cascaded taps appear and every tap mean improves",
         extra_active && dominates,
         std::string("taps ") + std::to_string(k1) + ".." + std::to_string(k_total - 1) +
             (extra_active ? " active" : " inactive") + ", per-tap dominance " +
             (dominates ? "holds" : "fails"));
}

// Criterion 10: water-filling KKT residual and rate dominance.
void check_water_filling() {
  RngStream rng(1010);
  double worst_budget = 0.0;
  double worst_level = 0.0;
  bool dominance = true;

  Scenario s;
  s.array_rows = 2;
  s.array_cols = 2;
  s.subcarrier_count = 32;
  s.taps_direct = 3;
  s.taps_bs_irs = 2;
  s.taps_irs_user = 2;
  s.cp_length = 6;

  for (int trial = 0; trial < 100; ++trial) {
    const CirMatrix cir = build_cir_matrix(sample_channel(s, 0, rng), s.subcarrier_count);
    const ReflectionVector v = random_reflection(s.element_count(), 2, rng);
    const CVector h = cfr(cir, v.extended());
    RVector gains(s.subcarrier_count);
    for (int m = 0; m < s.subcarrier_count; ++m) gains(m) = std::norm(h(m));

    const double power = 2.0;
    const double sigma2 = 1e-9;
    const RVector alloc = water_filling(gains, power, sigma2);
    worst_budget = std::max(worst_budget, std::abs(alloc.sum() - power) / power);

    double level = 0.0;
    for (int m = 0; m < s.subcarrier_count; ++m)
      if (alloc(m) > 0.0) level = std::max(level, alloc(m) + sigma2 / gains(m));
    for (int m = 0; m < s.subcarrier_count; ++m) {
      if (alloc(m) > 0.0)
        worst_level = std::max(
            worst_level, std::abs(alloc(m) + sigma2 / gains(m) - level) / level);
      else if (gains(m) > 0.0 && level - sigma2 / gains(m) > 1e-8 * level)
        worst_level = 1.0;
    }

    RateConfig wf{s.cp_length, power, sigma2, PowerAllocation::waterfilling};
    RateConfig eq{s.cp_length, power, sigma2, PowerAllocation::equal};
    if (achievable_rate(cir, v.extended(), wf) <
        achievable_rate(cir, v.extended(), eq) - 1e-12)
      dominance = false;
  }
  const bool pass = worst_budget < 1e-8 && worst_level < 1e-8 && dominance;
  report(10, "water-filling KKT and rate dominance", pass,
         "budget residual " + fmt(worst_budget) + ", level residual " + fmt(worst_level) +
             ", dominance " + (dominance ? "holds" : "fails"));
}

// Criterion 11: achievable rate improves with a stronger decay factor.
void check_rate_vs_decay() {
  ExperimentConfig cfg;
  cfg.preset = "rate_vs_epsilon";
  cfg.measurement_count = 300;
  cfg.axis_values = {0.5, 3.0};
  cfg.methods = {Method::proposed};
  cfg.realizations = 30;
  cfg.mode = MeasurementMode::exact;
  cfg.seed = 11;
  cfg.training.alpha0 = 1e-2;
  cfg.training.decay_per_iter = 0.002;
  cfg.training.max_iterations = 500;
  cfg.training.varsigma = 0.02;

  const SweepResult result = run_sweep(cfg.scenario, section_v_spec(cfg));
  std::map<double, double> mean;
  for (const auto& cell : result.cells) mean[cell.axis_value] = cell.mean;
  const double low = mean.at(0.5);
  const double high = mean.at(3.0);
  report(11, "rate at decay 3.0 exceeds rate at decay 0.5", high > low,
         "rate(0.5) " + fmt(low) + " bps/Hz, rate(3.0) " + fmt(high) + " bps/Hz");
}

// Criterion 12: repeated sweeps with one seed write byte-identical CSVs.
void check_determinism() {
  ExperimentConfig cfg = parse_experiment_config(
      "array_rows = 2\narray_cols = 2\nM = 16\nK1 = 2\nK2 = 2\nK3 = 2\n"
      "epsilon = 1.0\nmu = 2\nM_cp = 4\nL = 40\nmode = exact\nQ = 5\nM0 = 8\n"
      "T = 60\ntau = 1\nvarsigma = 0.05\nalpha0 = 0.02\nnum_candidates = 20\n"
      "relax_iters = 100\nrealizations = 2\naxis = 20,40\nseed = 3\n"
      "methods = proposed,csm,rms\npreset = gain_vs_L\n");
  const fs::path base = fs::temp_directory_path() / "irslab_acceptance";
  fs::remove_all(base);
  cfg.output_dir = (base / "sweep").string();

  const std::string text_a = read_text(cmd_sweep(cfg));
  const std::string text_b = read_text(cmd_sweep(cfg));
  report(12, "repeated sweeps are byte-identical", text_a == text_b,
         text_a == text_b ? std::to_string(text_a.size()) + " bytes compared equal"
                          : "outputs differ");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<void()>> groups = {
      {"subset_lemma", check_subset_lemma},
      {"gradient", check_gradient},
      {"representation", check_representation},
      {"planted_recovery", check_planted_recovery},
      {"toy_optimality", check_toy_optimality},
      {"method_ordering", check_method_ordering},
      {"nmse_trend", check_nmse_trend},
      {"extra_taps", check_extra_taps},
      {"water_filling", check_water_filling},
      {"rate_vs_decay", check_rate_vs_decay},
      {"determinism", check_determinism},
  };
  const std::vector<std::string> order = {
      "subset_lemma", "gradient",      "representation", "planted_recovery",
      "toy_optimality", "method_ordering", "nmse_trend",  "extra_taps",
      "water_filling", "rate_vs_decay", "determinism"};

  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(argv[i]);
  if (selected.empty()) selected = order;

  for (const auto& name : selected) {
    const auto it = groups.find(name);
    if (it == groups.end()) {
      std::fprintf(stderr, "unknown acceptance group: %s\n", name.c_str());
      return 64;
    }
    it->second();
  }
  return g_failures;
}
