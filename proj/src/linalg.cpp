#include "bcscf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>

namespace bcscf {

namespace {

std::string dim_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

MaskedMatrix::MaskedMatrix(int rows, int cols, std::vector<std::int32_t> row_idx,
                           std::vector<std::int32_t> col_idx, std::vector<double> values) {
  if (rows <= 0 || cols <= 0)
    throw ArgumentError("MaskedMatrix: dimensions must be positive, got " + std::to_string(rows) +
                        "x" + std::to_string(cols));
  if (row_idx.size() != col_idx.size() || row_idx.size() != values.size())
    throw ArgumentError("MaskedMatrix: index/value arrays must have equal length");

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto r = row_idx[i];
    const auto c = col_idx[i];
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw ArgumentError("MaskedMatrix: entry (" + std::to_string(r) + ", " + std::to_string(c) +
                          ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    if (!std::isfinite(values[i]))
      throw ArgumentError("MaskedMatrix: non-finite value at (" + std::to_string(r) + ", " +
                          std::to_string(c) + ")");
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 32) |
        static_cast<std::uint32_t>(c);
    if (!seen.insert(key).second)
      throw ArgumentError("MaskedMatrix: duplicate entry at (" + std::to_string(r) + ", " +
                          std::to_string(c) + ")");
  }

  rows_ = rows;
  cols_ = cols;
  row_idx_ = std::move(row_idx);
  col_idx_ = std::move(col_idx);
  values_ = std::move(values);
}

MaskedMatrix MaskedMatrix::with_same_support(const MaskedMatrix& like,
                                             std::vector<double> values) {
  if (values.size() != like.nnz())
    throw ArgumentError("MaskedMatrix: value count " + std::to_string(values.size()) +
                        " does not match support size " + std::to_string(like.nnz()));
  MaskedMatrix out;
  out.rows_ = like.rows_;
  out.cols_ = like.cols_;
  out.row_idx_ = like.row_idx_;
  out.col_idx_ = like.col_idx_;
  out.values_ = std::move(values);
  return out;
}

MaskedMatrix masked_residual(const MaskedMatrix& obs, const Matrix& U, const Matrix& V) {
  if (U.rows() != obs.rows() || V.cols() != obs.cols() || U.cols() != V.rows())
    throw ArgumentError("masked_residual: dimension mismatch, obs " + std::to_string(obs.rows()) +
                        "x" + std::to_string(obs.cols()) + ", U " + dim_str(U) + ", V " +
                        dim_str(V));

  const auto rows = obs.row_indices();
  const auto cols = obs.col_indices();
  const auto vals = obs.values();
  std::vector<double> out(obs.nnz());
  // Fixed-order serial loop: bitwise independent of thread count by construction.
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = vals[i] - U.row(rows[i]).dot(V.col(cols[i]));
  return MaskedMatrix::with_same_support(obs, std::move(out));
}

Matrix scatter(const MaskedMatrix& m) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  const auto rows = m.row_indices();
  const auto cols = m.col_indices();
  const auto vals = m.values();
  for (std::size_t i = 0; i < vals.size(); ++i) out(rows[i], cols[i]) = vals[i];
  return out;
}

double spectral_norm_sq(const Matrix& G, double tol, int max_iter) {
  if (G.rows() != G.cols())
    throw ArgumentError("spectral_norm_sq: matrix must be square, got " + dim_str(G));
  if (tol <= 0.0) throw ArgumentError("spectral_norm_sq: tol must be positive");
  if (max_iter < 1) throw ArgumentError("spectral_norm_sq: max_iter must be >= 1");
  const Eigen::Index n = G.rows();
  if (n == 0) return 0.0;

  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double rayleigh = 0.0;
  bool restarted = false;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = G * v;
    const double wn = w.norm();
    if (wn <= std::numeric_limits<double>::min() * static_cast<double>(n)) {
      if (G.isZero(0.0)) return 0.0;
      if (restarted) return 0.0;  // numerically zero action on both probes
      // Start vector annihilated by G: restart once from a seeded random direction.
      std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] = static_cast<double>(rng() >> 11) * 0x1p-53 - 0.5;
      v.normalize();
      restarted = true;
      continue;
    }
    const double next = v.dot(w);  // Rayleigh quotient at the current unit vector
    v = w / wn;
    if (it > 0 && std::abs(next - rayleigh) <= tol * std::abs(next)) return next;
    rayleigh = next;
  }
  return rayleigh;
}

Matrix solve_spd(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols())
    throw ArgumentError("solve_spd: A must be square, got " + dim_str(A));
  if (B.cols() != A.rows())
    throw ArgumentError("solve_spd: B is " + dim_str(B) + " but A is " + dim_str(A));
  const Eigen::Index k = A.rows();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ArgumentError("solve_spd: A is not symmetric");

  // Unpivoted Cholesky A = L L^T; fails loudly on the first non-positive pivot.
  Matrix L = Matrix::Zero(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double d = A(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d))
      throw NumericalError("solve_spd: matrix is not positive definite (pivot " +
                           std::to_string(j) + " = " + std::to_string(d) + ")");
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < k; ++i)
      L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
  }

  // X A = B  <=>  A X^T = B^T (A symmetric): forward/back substitution.
  Matrix Y = L.triangularView<Eigen::Lower>().solve(B.transpose());
  Matrix Xt = L.transpose().triangularView<Eigen::Upper>().solve(Y);
  return Xt.transpose();
}

double soft_threshold(double t, double s) {
  if (!(s >= 0.0)) throw ArgumentError("soft_threshold: threshold must be >= 0");
  const double m = std::abs(t) - s;
  return m > 0.0 ? (t < 0.0 ? -m : m) : 0.0;
}

Matrix soft_threshold(const Matrix& T, double s) {
  if (!(s >= 0.0)) throw ArgumentError("soft_threshold: threshold must be >= 0");
  Matrix out(T.rows(), T.cols());
  for (Eigen::Index c = 0; c < T.cols(); ++c)
    for (Eigen::Index r = 0; r < T.rows(); ++r) {
      const double t = T(r, c);
      const double m = std::abs(t) - s;
      out(r, c) = m > 0.0 ? (t < 0.0 ? -m : m) : 0.0;
    }
  return out;
}

}  // namespace bcscf
