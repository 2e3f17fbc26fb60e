#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "bcscf/errors.hpp"

namespace bcscf {

/// Dense real matrix. Row/column storage is Eigen's default; serialization
/// (model_io) fixes an explicit row-major byte layout independently of it.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Partially observed M x N matrix: only the entries on the sampling support
/// are stored, as parallel (row, col, value) arrays. This is the pair (A, Y):
/// the support is the sampling operator, the values are the measurements.
class MaskedMatrix {
 public:
  /// Validates bounds, finiteness and (row, col) uniqueness.
  MaskedMatrix(int rows, int cols, std::vector<std::int32_t> row_idx,
               std::vector<std::int32_t> col_idx, std::vector<double> values);

  /// Reuses the (already validated) support of `like` with fresh values.
  static MaskedMatrix with_same_support(const MaskedMatrix& like, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::int32_t> row_indices() const { return row_idx_; }
  std::span<const std::int32_t> col_indices() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

 private:
  MaskedMatrix() = default;

  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::int32_t> row_idx_;
  std::vector<std::int32_t> col_idx_;
  std::vector<double> values_;
};

/// Y - A(UV): the observation residual on the support of `obs`.
/// U is M x k, V is k x N. Entry order matches `obs`.
MaskedMatrix masked_residual(const MaskedMatrix& obs, const Matrix& U, const Matrix& V);

/// Scatters the masked values into a dense rows x cols matrix, zero elsewhere.
/// This is the adjoint of the sampling operator applied to the stored values.
Matrix scatter(const MaskedMatrix& m);

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration with a deterministic start vector (normalized all-ones).
/// Successive Rayleigh quotients within a relative `tol` stop the iteration;
/// a start vector annihilated by G triggers one seeded random restart.
/// For G = U^T U this is the squared spectral norm of U.
double spectral_norm_sq(const Matrix& G, double tol = 1e-10, int max_iter = 1000);

/// Solves X * A = B for X, with A k x k symmetric positive definite and
/// B m x k, via an unpivoted Cholesky factorization of A. Throws
/// NumericalError naming the pivot if A is not positive definite.
Matrix solve_spd(const Matrix& A, const Matrix& B);

/// sign(t) * max(0, |t| - s), the proximal operator of s * |.|.
double soft_threshold(double t, double s);

/// Elementwise soft threshold. s must be >= 0.
Matrix soft_threshold(const Matrix& T, double s);

}  // namespace bcscf
