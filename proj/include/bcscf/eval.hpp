#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bcscf/dataset.hpp"
#include "bcscf/solver.hpp"

namespace bcscf {

/// Everything a cross-validated experiment needs besides the data.
struct EvalConfig {
  SolverConfig solver;
  double delta = 1e-3;  // baseline ridge weight
  double baseline_tol = 1e-8;
  int baseline_max_sweeps = 200;
  bool clamp_predictions = true;
  int jobs = 1;  // folds fitted concurrently; results are independent of this
};

struct FoldResult {
  int fold = 0;
  double mae = 0.0;
  double train_seconds = 0.0;  // baseline fit + residual extraction + factor fit
  double v_sparsity = 0.0;
  int iterations = 0;
};

struct ExperimentResult {
  std::vector<FoldResult> per_fold;  // ordered by fold id
  double mean_mae = 0.0;
  double mean_seconds = 0.0;
  SolverConfig config;
  double delta = 0.0;
  bool clamped = true;
  std::string dataset_name;
  int n_folds = 0;
  std::uint64_t fold_seed = 0;
};

/// Mean absolute error sum(|truth - prediction|) / count.
double mae(std::span<const double> predictions, std::span<const double> truths);

/// Full k-fold protocol: for every fold, fit baseline + factors on the
/// training part and score the held-out records. Folds come from
/// make_folds(ds, n_folds, fold_seed); the solver seed lives in
/// cfg.solver.seed, so re-running with a different solver seed repeats the
/// experiment on identical folds.
ExperimentResult run_cross_validation(const RatingsDataset& ds, const EvalConfig& cfg,
                                      int n_folds, std::uint64_t fold_seed,
                                      const std::string& dataset_name = "");

struct SparsityReport {
  double v_zero_fraction = 0.0;
  // zeros_per_column_hist[z] = number of V columns with exactly z zero entries.
  std::vector<std::int64_t> zeros_per_column_hist;
};

SparsityReport sparsity_report(const FactorModel& model);

/// Machine-readable key = value report, one line per field. Field names are
/// documented in the README and covered by tests.
void write_report(std::ostream& os, std::span<const ExperimentResult> runs);

/// Human-readable fold table for the console.
std::string format_table(std::span<const ExperimentResult> runs);

}  // namespace bcscf
