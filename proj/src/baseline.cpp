#include "bcscf/baseline.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bcscf/errors.hpp"

namespace bcscf {

namespace {

// Entry list grouped by one side (user rows or item columns), CSR-style.
struct Adjacency {
  std::vector<std::size_t> offsets;  // size + 1
  std::vector<std::int32_t> other;   // index on the opposite side
  std::vector<double> value;
};

Adjacency group_by(std::span<const std::int32_t> key, std::span<const std::int32_t> other,
                   std::span<const double> value, int key_count) {
  Adjacency adj;
  adj.offsets.assign(static_cast<std::size_t>(key_count) + 1, 0);
  for (const auto k : key) ++adj.offsets[static_cast<std::size_t>(k) + 1];
  for (std::size_t i = 1; i < adj.offsets.size(); ++i) adj.offsets[i] += adj.offsets[i - 1];
  adj.other.resize(key.size());
  adj.value.resize(key.size());
  std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (std::size_t i = 0; i < key.size(); ++i) {
    const std::size_t slot = cursor[static_cast<std::size_t>(key[i])]++;
    adj.other[slot] = other[i];
    adj.value[slot] = value[i];
  }
  return adj;
}

}  // namespace

BaselineModel fit_baseline(const MaskedMatrix& train, double delta, double tol, int max_sweeps) {
  if (train.nnz() == 0) throw ArgumentError("fit_baseline: empty training set");
  if (!(delta > 0.0)) throw ArgumentError("fit_baseline: delta must be positive");
  if (!(tol > 0.0)) throw ArgumentError("fit_baseline: tol must be positive");
  if (max_sweeps < 0) throw ArgumentError("fit_baseline: max_sweeps must be >= 0");

  const auto vals = train.values();
  const double mu =
      std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());

  const Adjacency by_user =
      group_by(train.row_indices(), train.col_indices(), vals, train.rows());
  const Adjacency by_item =
      group_by(train.col_indices(), train.row_indices(), vals, train.cols());

  BaselineModel bl;
  bl.mu_g = mu;
  bl.delta = delta;
  bl.b_user = Vector::Zero(train.rows());
  bl.b_item = Vector::Zero(train.cols());

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int m = 0; m < train.rows(); ++m) {
      const std::size_t begin = by_user.offsets[m], end = by_user.offsets[m + 1];
      if (begin == end) continue;  // cold user keeps bias 0
      double num = 0.0;
      for (std::size_t i = begin; i < end; ++i)
        num += by_user.value[i] - mu - bl.b_item[by_user.other[i]];
      const double next = num / (static_cast<double>(end - begin) + delta);
      max_change = std::max(max_change, std::abs(next - bl.b_user[m]));
      bl.b_user[m] = next;
    }
    for (int n = 0; n < train.cols(); ++n) {
      const std::size_t begin = by_item.offsets[n], end = by_item.offsets[n + 1];
      if (begin == end) continue;
      double num = 0.0;
      for (std::size_t i = begin; i < end; ++i)
        num += by_item.value[i] - mu - bl.b_user[by_item.other[i]];
      const double next = num / (static_cast<double>(end - begin) + delta);
      max_change = std::max(max_change, std::abs(next - bl.b_item[n]));
      bl.b_item[n] = next;
    }
    if (max_change <= tol) break;
  }
  return bl;
}

MaskedMatrix interaction_residuals(const MaskedMatrix& train, const BaselineModel& bl) {
  if (bl.b_user.size() != train.rows() || bl.b_item.size() != train.cols())
    throw ArgumentError("interaction_residuals: baseline is " + std::to_string(bl.b_user.size()) +
                        "/" + std::to_string(bl.b_item.size()) + " biases but matrix is " +
                        std::to_string(train.rows()) + "x" + std::to_string(train.cols()));
  const auto rows = train.row_indices();
  const auto cols = train.col_indices();
  const auto vals = train.values();
  std::vector<double> z(train.nnz());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = vals[i] - bl.mu_g - bl.b_user[rows[i]] - bl.b_item[cols[i]];
  return MaskedMatrix::with_same_support(train, std::move(z));
}

double predict_baseline(const BaselineModel& bl, int m, int n) {
  if (m < 0 || m >= bl.b_user.size())
    throw ArgumentError("predict_baseline: user index " + std::to_string(m) + " outside [0, " +
                        std::to_string(bl.b_user.size()) + ")");
  if (n < 0 || n >= bl.b_item.size())
    throw ArgumentError("predict_baseline: item index " + std::to_string(n) + " outside [0, " +
                        std::to_string(bl.b_item.size()) + ")");
  return bl.mu_g + bl.b_user[m] + bl.b_item[n];
}

}  // namespace bcscf
