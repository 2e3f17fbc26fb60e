#include "bcscf/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "bcscf/baseline.hpp"
#include "bcscf/errors.hpp"

namespace bcscf {

namespace {

FoldResult run_fold(const RatingsDataset& ds, const FoldPlan& plan, int fold,
                    const EvalConfig& cfg) {
  TrainTestSplit parts = split(ds, plan, fold);

  const auto start = std::chrono::steady_clock::now();
  BaselineModel bl =
      fit_baseline(parts.train, cfg.delta, cfg.baseline_tol, cfg.baseline_max_sweeps);
  const MaskedMatrix interactions = interaction_residuals(parts.train, bl);
  FitResult fitted = fit(interactions, cfg.solver);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const FactorModel model = assemble_model(std::move(fitted.U), std::move(fitted.V),
                                           std::move(bl), cfg.solver, parts.train);
  std::vector<double> predictions, truths;
  predictions.reserve(parts.test.size());
  truths.reserve(parts.test.size());
  for (const RatingRecord& rec : parts.test) {
    const int m = ds.user_index(rec.user_id);
    const int n = ds.item_index(rec.item_id);
    predictions.push_back(cfg.clamp_predictions ? predict(model, m, n)
                                                : predict_raw(model, m, n));
    truths.push_back(rec.rating);
  }

  FoldResult result;
  result.fold = fold;
  result.mae = mae(predictions, truths);
  result.train_seconds = seconds;
  result.v_sparsity = fitted.report.v_sparsity;
  result.iterations = fitted.report.iterations_run;
  return result;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double mae(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.empty()) throw ArgumentError("mae: empty input");
  if (predictions.size() != truths.size())
    throw ArgumentError("mae: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(truths.size()) + " truths");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    sum += std::abs(truths[i] - predictions[i]);
  return sum / static_cast<double>(predictions.size());
}

ExperimentResult run_cross_validation(const RatingsDataset& ds, const EvalConfig& cfg,
                                      int n_folds, std::uint64_t fold_seed,
                                      const std::string& dataset_name) {
  if (cfg.jobs < 1) throw ArgumentError("run_cross_validation: jobs must be >= 1");
  const FoldPlan plan = make_folds(ds, n_folds, fold_seed);

  ExperimentResult result;
  result.per_fold.resize(static_cast<std::size_t>(n_folds));
  // Folds are independent; run up to cfg.jobs of them concurrently and merge
  // by fold id, so the outcome does not depend on scheduling.
  for (int begin = 0; begin < n_folds; begin += cfg.jobs) {
    const int end = std::min(n_folds, begin + cfg.jobs);
    std::vector<std::future<FoldResult>> batch;
    for (int fold = begin + 1; fold < end; ++fold)
      batch.push_back(std::async(std::launch::async,
                                 [&, fold] { return run_fold(ds, plan, fold, cfg); }));
    result.per_fold[static_cast<std::size_t>(begin)] = run_fold(ds, plan, begin, cfg);
    for (std::size_t i = 0; i < batch.size(); ++i)
      result.per_fold[static_cast<std::size_t>(begin) + 1 + i] = batch[i].get();
  }

  double mae_sum = 0.0, sec_sum = 0.0;
  for (const FoldResult& fr : result.per_fold) {
    mae_sum += fr.mae;
    sec_sum += fr.train_seconds;
  }
  result.mean_mae = mae_sum / static_cast<double>(n_folds);
  result.mean_seconds = sec_sum / static_cast<double>(n_folds);
  result.config = cfg.solver;
  result.delta = cfg.delta;
  result.clamped = cfg.clamp_predictions;
  result.dataset_name = dataset_name;
  result.n_folds = n_folds;
  result.fold_seed = fold_seed;
  return result;
}

SparsityReport sparsity_report(const FactorModel& model) {
  SparsityReport report;
  report.v_zero_fraction = zero_fraction(model.V);
  report.zeros_per_column_hist.assign(static_cast<std::size_t>(model.V.rows()) + 1, 0);
  for (Eigen::Index c = 0; c < model.V.cols(); ++c) {
    Eigen::Index zeros = 0;
    for (Eigen::Index r = 0; r < model.V.rows(); ++r)
      if (model.V(r, c) == 0.0) ++zeros;
    ++report.zeros_per_column_hist[static_cast<std::size_t>(zeros)];
  }
  return report;
}

void write_report(std::ostream& os, std::span<const ExperimentResult> runs) {
  if (runs.empty()) throw ArgumentError("write_report: no runs");
  const ExperimentResult& first = runs.front();
  os << "dataset = " << first.dataset_name << "\n";
  os << "n_folds = " << first.n_folds << "\n";
  os << "fold_seed = " << first.fold_seed << "\n";
  os << "variant = " << to_string(first.config.variant) << "\n";
  os << "rank = " << first.config.rank << "\n";
  os << "lambda_u = " << fmt(first.config.lambda_u) << "\n";
  os << "lambda_v = " << fmt(first.config.lambda_v) << "\n";
  os << "delta = " << fmt(first.delta) << "\n";
  os << "obj_tol = " << fmt(first.config.obj_tol) << "\n";
  os << "max_outer_iters = " << first.config.max_outer_iters << "\n";
  os << "inner_v_steps = " << first.config.inner_v_steps << "\n";
  os << "clamp = " << (first.clamped ? "true" : "false") << "\n";
  os << "repeats = " << runs.size() << "\n";

  double grand_mae = 0.0, grand_sec = 0.0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const std::string prefix = "run." + std::to_string(r) + ".";
    os << prefix << "solver_seed = " << runs[r].config.seed << "\n";
    for (const FoldResult& fr : runs[r].per_fold) {
      const std::string fp = prefix + "fold." + std::to_string(fr.fold) + ".";
      os << fp << "mae = " << fmt(fr.mae) << "\n";
      os << fp << "train_seconds = " << fmt(fr.train_seconds) << "\n";
      os << fp << "v_sparsity = " << fmt(fr.v_sparsity) << "\n";
      os << fp << "iterations = " << fr.iterations << "\n";
    }
    os << prefix << "mean_mae = " << fmt(runs[r].mean_mae) << "\n";
    os << prefix << "mean_seconds = " << fmt(runs[r].mean_seconds) << "\n";
    grand_mae += runs[r].mean_mae;
    grand_sec += runs[r].mean_seconds;
  }
  os << "mean_mae = " << fmt(grand_mae / static_cast<double>(runs.size())) << "\n";
  os << "mean_seconds = " << fmt(grand_sec / static_cast<double>(runs.size())) << "\n";
}

std::string format_table(std::span<const ExperimentResult> runs) {
  std::ostringstream os;
  char buf[160];
  os << "run  seed        fold  mae       time(s)   v-zeros   iters\n";
  double grand_mae = 0.0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const FoldResult& fr : runs[r].per_fold) {
      std::snprintf(buf, sizeof buf, "%-4zu %-11llu %-5d %-9.4f %-9.2f %-9.4f %d\n", r,
                    static_cast<unsigned long long>(runs[r].config.seed), fr.fold, fr.mae,
                    fr.train_seconds, fr.v_sparsity, fr.iterations);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%-4zu %-11llu mean  %-9.4f %-9.2f\n", r,
                  static_cast<unsigned long long>(runs[r].config.seed), runs[r].mean_mae,
                  runs[r].mean_seconds);
    os << buf;
    grand_mae += runs[r].mean_mae;
  }
  if (runs.size() > 1) {
    std::snprintf(buf, sizeof buf, "grand mean mae over %zu runs: %.4f\n", runs.size(),
                  grand_mae / static_cast<double>(runs.size()));
    os << buf;
  }
  return os.str();
}

}  // namespace bcscf
