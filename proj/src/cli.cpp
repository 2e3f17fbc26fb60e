#include "bcscf/cli.hpp"

#include <CLI11.hpp>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bcscf/baseline.hpp"
#include "bcscf/dataset.hpp"
#include "bcscf/errors.hpp"
#include "bcscf/eval.hpp"
#include "bcscf/model_io.hpp"
#include "bcscf/solver.hpp"

namespace bcscf {

namespace {

struct CliOptions {
  std::string dataset;
  std::string format = "100k";
  int rank = 50;
  double lambda_u = 1e3;
  double lambda_v = 1e-1;
  int max_iters = 200;
  double obj_tol = 1e-7;
  int inner_steps = 1;
  std::string variant = "bcs";
  double delta = 1e-3;
  double baseline_tol = 1e-8;
  int baseline_sweeps = 200;
  int folds = 5;
  std::uint64_t seed = 42;
  int repeats = 3;
  bool no_clamp = false;
  int jobs = 1;
  std::string out;
  std::string model = "model.bcscf";
  std::int64_t user_id = 0;
  std::int64_t item_id = 0;
};

MovieLensFormat format_from_string(const std::string& s) {
  if (s == "100k") return MovieLensFormat::Tab100k;
  if (s == "1m") return MovieLensFormat::Colon1m;
  throw ArgumentError("unknown format '" + s + "' (expected '100k' or '1m')");
}

SolverConfig solver_config(const CliOptions& o, std::uint64_t solver_seed) {
  SolverConfig cfg;
  cfg.rank = o.rank;
  cfg.lambda_u = o.lambda_u;
  cfg.lambda_v = o.lambda_v;
  cfg.max_outer_iters = o.max_iters;
  cfg.obj_tol = o.obj_tol;
  cfg.inner_v_steps = o.inner_steps;
  cfg.seed = solver_seed;
  cfg.variant = variant_from_string(o.variant);
  return cfg;
}

EvalConfig eval_config(const CliOptions& o, std::uint64_t solver_seed) {
  EvalConfig cfg;
  cfg.solver = solver_config(o, solver_seed);
  cfg.delta = o.delta;
  cfg.baseline_tol = o.baseline_tol;
  cfg.baseline_max_sweeps = o.baseline_sweeps;
  cfg.clamp_predictions = !o.no_clamp;
  cfg.jobs = o.jobs;
  return cfg;
}

MaskedMatrix full_matrix(const RatingsDataset& ds) {
  std::vector<std::int32_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(ds.size());
  cols.reserve(ds.size());
  vals.reserve(ds.size());
  for (const RatingRecord& rec : ds.records()) {
    rows.push_back(static_cast<std::int32_t>(ds.user_index(rec.user_id)));
    cols.push_back(static_cast<std::int32_t>(ds.item_index(rec.item_id)));
    vals.push_back(rec.rating);
  }
  return MaskedMatrix(ds.num_users(), ds.num_items(), std::move(rows), std::move(cols),
                      std::move(vals));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

// Reference MAE values reported for MovieLens by the published BCS-CF
// evaluation; shown next to measured numbers by `compare`.
struct ReferenceRow {
  const char* algorithm;
  double mae_3fold;
  double mae_5fold;
  double mae_10fold;
};
constexpr std::array<ReferenceRow, 2> kReference100k = {
    ReferenceRow{"BCS-CF", 0.7417, 0.7215, 0.7140},
    ReferenceRow{"SGD", 0.8002, 0.7432, 0.7312},
};
constexpr std::array<ReferenceRow, 2> kReference1m = {
    ReferenceRow{"BCS-CF", 0.6835, 0.6762, 0.6712},
    ReferenceRow{"SGD", 0.6988, 0.6936, 0.6907},
};

int cmd_inspect(const CliOptions& o) {
  const RatingsDataset ds = parse_movielens(o.dataset, format_from_string(o.format));
  std::array<std::int64_t, 5> histogram{};
  for (const RatingRecord& rec : ds.records()) {
    const auto star = static_cast<int>(std::llround(rec.rating));
    ++histogram[static_cast<std::size_t>(star - 1)];
  }
  const double density = static_cast<double>(ds.size()) /
                         (static_cast<double>(ds.num_users()) *
                          static_cast<double>(ds.num_items()));
  std::printf("dataset: %s\n", o.dataset.c_str());
  std::printf("users: %d\n", ds.num_users());
  std::printf("items: %d\n", ds.num_items());
  std::printf("ratings: %zu\n", ds.size());
  std::printf("density: %.6f\n", density);
  std::printf("rating histogram:\n");
  for (int star = 1; star <= 5; ++star) {
    const auto count = histogram[static_cast<std::size_t>(star - 1)];
    std::printf("  %d: %" PRId64 " (%.1f%%)\n", star, count,
                100.0 * static_cast<double>(count) / static_cast<double>(ds.size()));
  }
  return exit_code::ok;
}

int cmd_train(const CliOptions& o) {
  const RatingsDataset ds = parse_movielens(o.dataset, format_from_string(o.format));
  const MaskedMatrix train = full_matrix(ds);
  const SolverConfig cfg = solver_config(o, o.seed);

  BaselineModel bl = fit_baseline(train, o.delta, o.baseline_tol, o.baseline_sweeps);
  const MaskedMatrix interactions = interaction_residuals(train, bl);
  FitResult fitted = fit(interactions, cfg);
  const FitReport& report = fitted.report;

  std::printf("users: %d  items: %d  ratings: %zu\n", ds.num_users(), ds.num_items(), ds.size());
  std::printf("baseline: mu_g = %.4f  delta = %g\n", bl.mu_g, o.delta);
  std::printf("solver: variant=%s rank=%d lambda_u=%g lambda_v=%g seed=%" PRIu64 "\n",
              o.variant.c_str(), cfg.rank, cfg.lambda_u, cfg.lambda_v, cfg.seed);
  if (report.objective_trace.empty())
    std::printf("objective: no iterations run\n");
  else
    std::printf("objective: %.6e -> %.6e over %d iterations (%s)\n",
                report.objective_trace.front(), report.objective_trace.back(),
                report.iterations_run, report.converged ? "converged" : "iteration cap");
  std::printf("v sparsity: %.4f (fraction of exact zeros)\n", report.v_sparsity);
  std::printf("wall time: %.2f s\n", report.wall_time_seconds);

  SavedModel saved;
  saved.user_ids.assign(ds.user_ids().begin(), ds.user_ids().end());
  saved.item_ids.assign(ds.item_ids().begin(), ds.item_ids().end());
  saved.model = assemble_model(std::move(fitted.U), std::move(fitted.V), std::move(bl), cfg,
                               train);
  save_model(o.model, saved);
  std::printf("model written to: %s\n", o.model.c_str());

  if (!o.out.empty()) {
    auto out = open_out(o.out);
    out << "command = train\n"
        << "dataset = " << o.dataset << "\n"
        << "variant = " << o.variant << "\n"
        << "rank = " << cfg.rank << "\n"
        << "lambda_u = " << cfg.lambda_u << "\n"
        << "lambda_v = " << cfg.lambda_v << "\n"
        << "delta = " << o.delta << "\n"
        << "seed = " << cfg.seed << "\n"
        << "iterations = " << report.iterations_run << "\n"
        << "converged = " << (report.converged ? "true" : "false") << "\n"
        << "wall_seconds = " << report.wall_time_seconds << "\n"
        << "v_sparsity = " << report.v_sparsity << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < report.objective_trace.size(); ++i)
      out << "objective." << i << " = " << report.objective_trace[i] << "\n";
    std::printf("report written to: %s\n", o.out.c_str());
  }
  return exit_code::ok;
}

std::vector<ExperimentResult> run_repeats(const RatingsDataset& ds, const CliOptions& o,
                                          Variant variant, const std::string& name) {
  std::vector<ExperimentResult> runs;
  runs.reserve(static_cast<std::size_t>(o.repeats));
  for (int r = 0; r < o.repeats; ++r) {
    EvalConfig cfg = eval_config(o, o.seed + static_cast<std::uint64_t>(r));
    cfg.solver.variant = variant;
    runs.push_back(run_cross_validation(ds, cfg, o.folds, o.seed, name));
  }
  return runs;
}

double grand_mean_mae(std::span<const ExperimentResult> runs) {
  double sum = 0.0;
  for (const ExperimentResult& run : runs) sum += run.mean_mae;
  return sum / static_cast<double>(runs.size());
}

int cmd_cross_validate(const CliOptions& o) {
  const RatingsDataset ds = parse_movielens(o.dataset, format_from_string(o.format));
  const auto runs = run_repeats(ds, o, variant_from_string(o.variant), o.dataset);
  std::fputs(format_table(runs).c_str(), stdout);
  if (!o.out.empty()) {
    auto out = open_out(o.out);
    write_report(out, runs);
    std::printf("report written to: %s\n", o.out.c_str());
  }
  return exit_code::ok;
}

int cmd_predict(const CliOptions& o) {
  const SavedModel saved = load_model(o.model);
  const int m = saved.user_index(o.user_id);
  const int n = saved.item_index(o.item_id);
  const double value =
      o.no_clamp ? predict_raw(saved.model, m, n) : predict(saved.model, m, n);
  std::printf("%.4f\n", value);
  return exit_code::ok;
}

int cmd_compare(const CliOptions& o) {
  const RatingsDataset ds = parse_movielens(o.dataset, format_from_string(o.format));
  const auto bcs_runs = run_repeats(ds, o, Variant::Bcs, o.dataset);
  const auto dense_runs = run_repeats(ds, o, Variant::Dense, o.dataset);

  // Both variants derive folds from the same (dataset, folds, seed) triple.
  const FoldPlan plan_a = make_folds(ds, o.folds, o.seed);
  const FoldPlan plan_b = make_folds(ds, o.folds, o.seed);
  const bool same_folds = plan_a.assignments == plan_b.assignments;

  std::printf("== variant bcs ==\n%s", format_table(bcs_runs).c_str());
  std::printf("== variant dense ==\n%s", format_table(dense_runs).c_str());
  std::printf("fold assignments identical across variants: %s\n", same_folds ? "yes" : "NO");

  const auto mean_sparsity = [](std::span<const ExperimentResult> runs) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const ExperimentResult& run : runs)
      for (const FoldResult& fr : run.per_fold) {
        sum += fr.v_sparsity;
        ++count;
      }
    return sum / static_cast<double>(count);
  };
  const auto mean_seconds = [](std::span<const ExperimentResult> runs) {
    double sum = 0.0;
    for (const ExperimentResult& run : runs) sum += run.mean_seconds;
    return sum / static_cast<double>(runs.size());
  };
  std::printf("paired summary:\n");
  std::printf("variant  mean-mae  mean-time(s)  mean-v-zeros\n");
  std::printf("bcs      %-9.4f %-13.2f %.4f\n", grand_mean_mae(bcs_runs),
              mean_seconds(bcs_runs), mean_sparsity(bcs_runs));
  std::printf("dense    %-9.4f %-13.2f %.4f\n", grand_mean_mae(dense_runs),
              mean_seconds(dense_runs), mean_sparsity(dense_runs));

  const auto& reference = o.format == "1m" ? kReference1m : kReference100k;
  std::printf("reference MAE (ml-%s, published):\n", o.format.c_str());
  std::printf("algorithm  3-fold   5-fold   10-fold\n");
  for (const ReferenceRow& row : reference)
    std::printf("%-10s %-8.4f %-8.4f %-8.4f\n", row.algorithm, row.mae_3fold, row.mae_5fold,
                row.mae_10fold);

  if (!o.out.empty()) {
    auto out = open_out(o.out);
    const auto emit_prefixed = [&out](const std::string& prefix,
                                      std::span<const ExperimentResult> runs) {
      std::ostringstream buffer;
      write_report(buffer, runs);
      std::istringstream lines(buffer.str());
      std::string line;
      while (std::getline(lines, line)) out << prefix << line << "\n";
    };
    out << "command = compare\n";
    out << "folds_identical = " << (same_folds ? "true" : "false") << "\n";
    emit_prefixed("bcs.", bcs_runs);
    emit_prefixed("dense.", dense_runs);
    for (const ReferenceRow& row : reference) {
      const std::string key = std::string("reference.") + row.algorithm;
      out << key << ".mae_3fold = " << row.mae_3fold << "\n";
      out << key << ".mae_5fold = " << row.mae_5fold << "\n";
      out << key << ".mae_10fold = " << row.mae_10fold << "\n";
    }
    std::printf("report written to: %s\n", o.out.c_str());
  }
  return exit_code::ok;
}

void add_dataset_options(CLI::App* sub, CliOptions& o) {
  sub->add_option("--dataset", o.dataset, "path to a MovieLens ratings file")->required();
  sub->add_option("--format", o.format, "dataset format")
      ->check(CLI::IsMember({"100k", "1m"}))
      ->capture_default_str();
}

CLI::Option* add_solver_options(CLI::App* sub, CliOptions& o) {
  CLI::Option* lambda_u = sub->add_option("--lambda-u", o.lambda_u,
                                          "Frobenius penalty on user factors "
                                          "(default 1e3; 1e4 when --format 1m)");
  sub->add_option("--rank", o.rank, "number of latent factors")->capture_default_str();
  sub->add_option("--lambda-v", o.lambda_v, "l1 penalty on item factors (Frobenius for the "
                                            "dense variant)")
      ->capture_default_str();
  sub->add_option("--delta", o.delta, "baseline bias ridge weight")->capture_default_str();
  sub->add_option("--baseline-tol", o.baseline_tol, "baseline coordinate-descent tolerance")
      ->capture_default_str();
  sub->add_option("--baseline-sweeps", o.baseline_sweeps, "baseline max sweeps")
      ->capture_default_str();
  sub->add_option("--max-iters", o.max_iters, "outer iteration cap")->capture_default_str();
  sub->add_option("--tol", o.obj_tol, "relative objective-decrease stopping tolerance")
      ->capture_default_str();
  sub->add_option("--inner-steps", o.inner_steps, "soft-threshold steps per outer iteration")
      ->capture_default_str();
  sub->add_option("--variant", o.variant, "factorization variant")
      ->check(CLI::IsMember({"bcs", "dense"}))
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "seed for fold assignment and factor init")
      ->capture_default_str();
  return lambda_u;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CliOptions o;
  CLI::App app{"bcscf: rating prediction by matrix factorization with a dense user factor "
               "matrix and a sparse item factor matrix"};
  app.require_subcommand(1);

  CLI::App* inspect = app.add_subcommand("inspect", "parse a dataset and print summary stats");
  add_dataset_options(inspect, o);

  CLI::App* train = app.add_subcommand("train", "fit a model on the full dataset and save it");
  add_dataset_options(train, o);
  CLI::Option* train_lu = add_solver_options(train, o);
  train->add_option("--model", o.model, "output model file")->capture_default_str();
  train->add_option("--out", o.out, "optional fit report file");

  CLI::App* cv = app.add_subcommand("cross-validate", "k-fold cross-validated MAE experiment");
  add_dataset_options(cv, o);
  CLI::Option* cv_lu = add_solver_options(cv, o);
  cv->add_option("--folds", o.folds, "number of folds")->capture_default_str();
  cv->add_option("--repeats", o.repeats, "solver re-runs on the same folds, seeds seed..seed+r-1")
      ->capture_default_str();
  cv->add_option("--jobs", o.jobs, "folds fitted concurrently")->capture_default_str();
  cv->add_flag("--no-clamp", o.no_clamp, "score raw predictions instead of clamped ones");
  cv->add_option("--out", o.out, "report file (key = value lines)")
      ->default_val("cv-report.txt")
      ->capture_default_str();

  CLI::App* predict_cmd = app.add_subcommand("predict", "predict one rating from a saved model");
  predict_cmd->add_option("--model", o.model, "model file from `train`")->required();
  predict_cmd->add_option("--user", o.user_id, "original user id")->required();
  predict_cmd->add_option("--item", o.item_id, "original item id")->required();
  predict_cmd->add_flag("--no-clamp", o.no_clamp, "print the raw prediction");

  CLI::App* compare = app.add_subcommand("compare",
                                         "run bcs and dense variants on identical folds");
  add_dataset_options(compare, o);
  CLI::Option* compare_lu = add_solver_options(compare, o);
  compare->add_option("--folds", o.folds, "number of folds")->capture_default_str();
  compare->add_option("--repeats", o.repeats, "solver re-runs per variant")
      ->capture_default_str();
  compare->add_option("--jobs", o.jobs, "folds fitted concurrently")->capture_default_str();
  compare->add_flag("--no-clamp", o.no_clamp, "score raw predictions instead of clamped ones");
  compare->add_option("--out", o.out, "report file")->default_val("compare-report.txt");

  for (CLI::App* sub : {inspect, train, cv, predict_cmd, compare})
    sub->set_config("--config", "", "read option defaults from a key=value file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::ok : exit_code::argument;
  }

  try {
    // The 1M experiments use a heavier user-factor penalty unless overridden.
    if (o.format == "1m") {
      if (train->parsed() && train_lu->count() == 0) o.lambda_u = 1e4;
      if (cv->parsed() && cv_lu->count() == 0) o.lambda_u = 1e4;
      if (compare->parsed() && compare_lu->count() == 0) o.lambda_u = 1e4;
    }
    if (inspect->parsed()) return cmd_inspect(o);
    if (train->parsed()) return cmd_train(o);
    if (cv->parsed()) return cmd_cross_validate(o);
    if (predict_cmd->parsed()) return cmd_predict(o);
    if (compare->parsed()) return cmd_compare(o);
    return exit_code::argument;
  } catch (const UnknownIdError& e) {
    std::cerr << "error (unknown id): " << e.what() << "\n";
    return exit_code::unknown_id;
  } catch (const ArgumentError& e) {
    std::cerr << "error (argument): " << e.what() << "\n";
    return exit_code::argument;
  } catch (const ParseError& e) {
    std::cerr << "error (parse): " << e.what() << "\n";
    return exit_code::parse;
  } catch (const ValidationError& e) {
    std::cerr << "error (validation): " << e.what() << "\n";
    return exit_code::validation;
  } catch (const NumericalError& e) {
    std::cerr << "error (numerical): " << e.what() << "\n";
    return exit_code::numerical;
  } catch (const IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return exit_code::io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::failure;
  }
}

}  // namespace bcscf
