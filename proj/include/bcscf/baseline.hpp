#pragma once

#include "bcscf/linalg.hpp"

namespace bcscf {

/// Global mean plus per-user and per-item rating offsets. Users/items with
/// no training ratings keep bias exactly 0.
struct BaselineModel {
  double mu_g = 0.0;
  Vector b_user;
  Vector b_item;
  double delta = 0.0;  // ridge weight the biases were fit with
};

/// Fits the biases by cyclic coordinate descent on the ridge objective
///   sum_obs (r - mu_g - b_m - b_n)^2 + delta * (sum b_m^2 + sum b_n^2)
/// with mu_g fixed to the training mean. Each sweep updates all user biases
/// (closed form, exact per coordinate), then all item biases; stops when the
/// largest bias change is <= tol or after max_sweeps sweeps.
BaselineModel fit_baseline(const MaskedMatrix& train, double delta, double tol = 1e-8,
                           int max_sweeps = 200);

/// Z = r - mu_g - b_m - b_n on the training support: the interaction part
/// that the factorization actually models.
MaskedMatrix interaction_residuals(const MaskedMatrix& train, const BaselineModel& bl);

/// mu_g + b_m + b_n. Indices are dense and bounds-checked.
double predict_baseline(const BaselineModel& bl, int m, int n);

}  // namespace bcscf
