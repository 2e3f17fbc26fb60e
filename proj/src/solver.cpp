#include "bcscf/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "bcscf/errors.hpp"

namespace bcscf {

namespace {

void check_dims(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, const char* where) {
  if (U.rows() != obs.rows() || V.cols() != obs.cols() || U.cols() != V.rows())
    throw ArgumentError(std::string(where) + ": dimension mismatch, obs " +
                        std::to_string(obs.rows()) + "x" + std::to_string(obs.cols()) + ", U " +
                        std::to_string(U.rows()) + "x" + std::to_string(U.cols()) + ", V " +
                        std::to_string(V.rows()) + "x" + std::to_string(V.cols()));
}

// Landing matrix of the patch step: the current product with every observed
// cell overwritten by its observed value. With unit step size the update
// P + (y - P) collapses to the observed value itself.
Matrix landing_matrix(const MaskedMatrix& obs, const Matrix& U, const Matrix& V) {
  Matrix Z = U * V;
  const auto rows = obs.row_indices();
  const auto cols = obs.col_indices();
  const auto vals = obs.values();
  for (std::size_t i = 0; i < vals.size(); ++i) Z(rows[i], cols[i]) = vals[i];
  return Z;
}

double masked_residual_sq_sum(const MaskedMatrix& obs, const Matrix& U, const Matrix& V) {
  const auto rows = obs.row_indices();
  const auto cols = obs.col_indices();
  const auto vals = obs.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double r = vals[i] - U.row(rows[i]).dot(V.col(cols[i]));
    sum += r * r;
  }
  return sum;
}

void check_config(const SolverConfig& config) {
  if (config.rank < 1) throw ArgumentError("SolverConfig: rank must be >= 1");
  if (!(config.lambda_u > 0.0)) throw ArgumentError("SolverConfig: lambda_u must be positive");
  if (!(config.lambda_v > 0.0)) throw ArgumentError("SolverConfig: lambda_v must be positive");
  if (!(config.obj_tol > 0.0)) throw ArgumentError("SolverConfig: obj_tol must be positive");
  if (config.max_outer_iters < 0)
    throw ArgumentError("SolverConfig: max_outer_iters must be >= 0");
  if (config.inner_v_steps < 1)
    throw ArgumentError("SolverConfig: inner_v_steps must be >= 1");
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::Bcs ? "bcs" : "dense"; }

Variant variant_from_string(const std::string& s) {
  if (s == "bcs") return Variant::Bcs;
  if (s == "dense") return Variant::Dense;
  throw ArgumentError("unknown variant '" + s + "' (expected 'bcs' or 'dense')");
}

std::pair<Matrix, Matrix> init_factors(int num_rows, int num_cols, const SolverConfig& config) {
  if (num_rows < 1 || num_cols < 1)
    throw ArgumentError("init_factors: dimensions must be positive");
  check_config(config);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.rank));
  std::mt19937_64 rng(config.seed);
  const auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1p-53; };

  Matrix U(num_rows, config.rank);
  for (Eigen::Index r = 0; r < U.rows(); ++r)
    for (Eigen::Index c = 0; c < U.cols(); ++c) U(r, c) = u01() * scale;
  Matrix V(config.rank, num_cols);
  for (Eigen::Index r = 0; r < V.rows(); ++r)
    for (Eigen::Index c = 0; c < V.cols(); ++c) V(r, c) = u01() * scale;
  return {std::move(U), std::move(V)};
}

Matrix update_u(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, double lambda_u) {
  check_dims(obs, U, V, "update_u");
  if (!(lambda_u > 0.0)) throw ArgumentError("update_u: lambda_u must be positive");

  const Matrix Z = landing_matrix(obs, U, V);
  Matrix G = V * V.transpose();
  G.diagonal().array() += lambda_u;
  const Matrix B = Z * V.transpose();
  return solve_spd(G, B);  // U_next (V V^T + lambda_u I) = Z V^T
}

Matrix update_v(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, double lambda_v,
                int inner_steps) {
  check_dims(obs, U, V, "update_v");
  if (!(lambda_v > 0.0)) throw ArgumentError("update_v: lambda_v must be positive");
  if (inner_steps < 1) throw ArgumentError("update_v: inner_steps must be >= 1");

  Matrix product = U * V;
  Matrix W = product;
  {
    const auto rows = obs.row_indices();
    const auto cols = obs.col_indices();
    const auto vals = obs.values();
    for (std::size_t i = 0; i < vals.size(); ++i) W(rows[i], cols[i]) = vals[i];
  }

  const double alpha = 1.01 * spectral_norm_sq(U.transpose() * U);
  if (!(alpha > 0.0))
    throw NumericalError(
        "update_v: step scale is zero because U vanished; re-initialize with a different seed");
  const double threshold = lambda_v / (2.0 * alpha);

  Matrix Vnext = V;
  for (int step = 0; step < inner_steps; ++step) {
    if (step > 0) product = U * Vnext;
    const Matrix T = Vnext + (U.transpose() * (W - product)) / alpha;
    Vnext = soft_threshold(T, threshold);
  }
  return Vnext;
}

Matrix update_v_dense(const MaskedMatrix& obs, const Matrix& U, const Matrix& V,
                      double lambda_v) {
  check_dims(obs, U, V, "update_v_dense");
  if (!(lambda_v > 0.0)) throw ArgumentError("update_v_dense: lambda_v must be positive");

  const Matrix W = landing_matrix(obs, U, V);
  Matrix G = U.transpose() * U;
  G.diagonal().array() += lambda_v;
  const Matrix C = U.transpose() * W;  // k x N
  // (U^T U + lambda_v I) V_next = U^T W, solved through X G = C^T.
  return solve_spd(G, C.transpose()).transpose();
}

double objective(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, double lambda_u,
                 double lambda_v) {
  check_dims(obs, U, V, "objective");
  return masked_residual_sq_sum(obs, U, V) + lambda_u * U.squaredNorm() +
         lambda_v * V.cwiseAbs().sum();
}

double dense_objective(const MaskedMatrix& obs, const Matrix& U, const Matrix& V,
                       double lambda_u, double lambda_v) {
  check_dims(obs, U, V, "dense_objective");
  return masked_residual_sq_sum(obs, U, V) + lambda_u * U.squaredNorm() +
         lambda_v * V.squaredNorm();
}

FitResult fit(const MaskedMatrix& obs, const SolverConfig& config) {
  check_config(config);
  if (obs.nnz() == 0) throw ArgumentError("fit: no observed entries");

  const auto start = std::chrono::steady_clock::now();
  auto [U, V] = init_factors(obs.rows(), obs.cols(), config);

  FitReport report;
  report.objective_trace.reserve(static_cast<std::size_t>(config.max_outer_iters));
  for (int it = 0; it < config.max_outer_iters; ++it) {
    U = update_u(obs, U, V, config.lambda_u);
    V = config.variant == Variant::Bcs
            ? update_v(obs, U, V, config.lambda_v, config.inner_v_steps)
            : update_v_dense(obs, U, V, config.lambda_v);
    const double obj = config.variant == Variant::Bcs
                           ? objective(obs, U, V, config.lambda_u, config.lambda_v)
                           : dense_objective(obs, U, V, config.lambda_u, config.lambda_v);
    if (!std::isfinite(obj))
      throw NumericalError("fit: objective diverged at iteration " + std::to_string(it + 1));
    report.objective_trace.push_back(obj);
    if (it >= 1) {
      const double prev = report.objective_trace[static_cast<std::size_t>(it) - 1];
      if (std::abs(obj - prev) <= config.obj_tol * std::max(1.0, prev)) {
        report.converged = true;
        break;
      }
    }
  }
  report.iterations_run = static_cast<int>(report.objective_trace.size());
  report.v_sparsity = zero_fraction(V);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return FitResult{std::move(U), std::move(V), std::move(report)};
}

double zero_fraction(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::Index zeros = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (m(r, c) == 0.0) ++zeros;
  return static_cast<double>(zeros) / static_cast<double>(m.size());
}

FactorModel assemble_model(Matrix U, Matrix V, BaselineModel baseline, SolverConfig config,
                           const MaskedMatrix& train) {
  if (U.rows() != train.rows() || V.cols() != train.cols() ||
      baseline.b_user.size() != train.rows() || baseline.b_item.size() != train.cols())
    throw ArgumentError("assemble_model: factor/baseline dimensions do not match the training "
                        "matrix");
  FactorModel model;
  model.U = std::move(U);
  model.V = std::move(V);
  model.baseline = std::move(baseline);
  model.config = config;
  model.user_observed.assign(static_cast<std::size_t>(train.rows()), 0);
  model.item_observed.assign(static_cast<std::size_t>(train.cols()), 0);
  for (const auto r : train.row_indices()) model.user_observed[static_cast<std::size_t>(r)] = 1;
  for (const auto c : train.col_indices()) model.item_observed[static_cast<std::size_t>(c)] = 1;
  return model;
}

double predict_raw(const FactorModel& model, int m, int n) {
  if (m < 0 || m >= model.U.rows())
    throw ArgumentError("predict: user index " + std::to_string(m) + " outside [0, " +
                        std::to_string(model.U.rows()) + ")");
  if (n < 0 || n >= model.V.cols())
    throw ArgumentError("predict: item index " + std::to_string(n) + " outside [0, " +
                        std::to_string(model.V.cols()) + ")");
  double value = predict_baseline(model.baseline, m, n);
  const bool cold = model.user_observed[static_cast<std::size_t>(m)] == 0 ||
                    model.item_observed[static_cast<std::size_t>(n)] == 0;
  if (!cold) value += model.U.row(m).dot(model.V.col(n));
  return value;
}

double predict(const FactorModel& model, int m, int n) {
  return std::clamp(predict_raw(model, m, n), 1.0, 5.0);
}

}  // namespace bcscf
