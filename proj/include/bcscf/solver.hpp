#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bcscf/baseline.hpp"
#include "bcscf/linalg.hpp"

namespace bcscf {

enum class Variant : std::uint8_t {
  Bcs = 0,    // Frobenius penalty on U, l1 penalty on V (sparse item factors)
  Dense = 1,  // Frobenius penalty on both factors (classical baseline)
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct SolverConfig {
  int rank = 50;
  double lambda_u = 1e3;
  double lambda_v = 1e-1;
  int max_outer_iters = 200;
  double obj_tol = 1e-7;
  int inner_v_steps = 1;
  std::uint64_t seed = 0;
  Variant variant = Variant::Bcs;
};

struct FitReport {
  std::vector<double> objective_trace;  // one value per completed outer iteration
  int iterations_run = 0;
  bool converged = false;
  double wall_time_seconds = 0.0;
  double v_sparsity = 0.0;  // fraction of exactly-zero entries in V
};

/// Factor pair produced by fit(); the baseline is attached by the caller
/// (see assemble_model).
struct FitResult {
  Matrix U;  // M x k, dense user factors
  Matrix V;  // k x N, item factors (sparse by value under the bcs variant)
  FitReport report;
};

/// Complete rating model: factors, baseline, and the training support masks
/// that drive cold-start fallback at prediction time.
struct FactorModel {
  Matrix U;
  Matrix V;
  BaselineModel baseline;
  SolverConfig config;
  std::vector<std::uint8_t> user_observed;  // 1 iff the user had >= 1 training rating
  std::vector<std::uint8_t> item_observed;
};

/// Seeded uniform [0,1) entries scaled by 1/sqrt(k); U is filled first, then
/// V, each row by row, so a seed pins both matrices exactly.
std::pair<Matrix, Matrix> init_factors(int num_rows, int num_cols, const SolverConfig& config);

/// One exact ridge update of the user factors: forms the landing matrix
/// Z = U V with observed cells overwritten by their observed values (the
/// residual-patching step with unit step size), then solves
/// U_next (V V^T + lambda_u I) = Z V^T.
Matrix update_u(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, double lambda_u);

/// Iterative soft-thresholding update of the item factors: forms the landing
/// matrix W = U V patched with observed values, sets the step scale
/// alpha = 1.01 * max eig(U^T U), then runs `inner_steps` iterations of
///   V <- soft(V + (1/alpha) U^T (W - U V), lambda_v / (2 alpha)).
Matrix update_v(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, double lambda_v,
                int inner_steps = 1);

/// Ridge update of the item factors for the dense variant:
/// (U^T U + lambda_v I) V_next = U^T W with the same landing matrix W.
Matrix update_v_dense(const MaskedMatrix& obs, const Matrix& U, const Matrix& V,
                      double lambda_v);

/// sum_obs (y - (UV))^2 + lambda_u ||U||_F^2 + lambda_v ||vec(V)||_1.
double objective(const MaskedMatrix& obs, const Matrix& U, const Matrix& V, double lambda_u,
                 double lambda_v);

/// sum_obs (y - (UV))^2 + lambda_u ||U||_F^2 + lambda_v ||V||_F^2, the
/// objective the dense variant descends.
double dense_objective(const MaskedMatrix& obs, const Matrix& U, const Matrix& V,
                       double lambda_u, double lambda_v);

/// Alternating solver: repeats (update_u, V-step for the configured variant),
/// recording the variant's objective after each outer iteration, and stops
/// when |obj(k) - obj(k-1)| <= obj_tol * max(1, obj(k-1)) or the iteration
/// cap is reached.
FitResult fit(const MaskedMatrix& obs, const SolverConfig& config);

/// Fraction of exactly-zero entries of a matrix.
double zero_fraction(const Matrix& m);

/// Bundles factors with a baseline and records which users/items had
/// training support (for cold-start prediction).
FactorModel assemble_model(Matrix U, Matrix V, BaselineModel baseline, SolverConfig config,
                           const MaskedMatrix& train);

/// Baseline + <U_m, V_n>, clamped to [1, 5]. Users or items without training
/// support are predicted by the baseline alone (their factors carry no
/// information).
double predict(const FactorModel& model, int m, int n);

/// Same as predict() without the final clamp.
double predict_raw(const FactorModel& model, int m, int n);

}  // namespace bcscf
