#pragma once

#include "masked_matrix.hpp"

namespace mcm {

struct RidgeSpec {
  double lambda = 1e-3;
  bool fit_intercept = true;
};

struct LinearModel {
  Vector coef;
  double intercept = 0.0;
  // Set when lambda = 0 and the normal equations were singular; the
  // minimum-norm least-squares solution was used instead.
  bool used_pseudo_inverse = false;

  Vector predict(const Matrix& x) const;
};

// Minimizes ||y - X b - c||^2 + lambda ||b||^2; the intercept c is not penalized.
LinearModel fit_ridge(const Matrix& x, const Vector& y, const RidgeSpec& spec);

struct PropensitySpec {
  double l2 = 1e-3;
  double clip_delta = 0.025;
  int max_iter = 100;
  double tol = 1e-8;

  void validate() const;
};

struct LogisticModel {
  Vector coef;
  double intercept = 0.0;
  double clip_delta = 0.0;
  int iterations = 0;
  bool converged = false;

  // Unclipped P(W = 1 | x).
  Vector predict_raw(const Matrix& x) const;
  // P(W = 1 | x) clipped into [delta, 1 - delta].
  Vector predict(const Matrix& x) const;
};

// Newton / IRLS on the L2-penalized negative log-likelihood
// sum(log(1 + e^eta) - w eta) + l2 ||b||^2, with step halving.
LogisticModel fit_logistic(const Matrix& x, const Vector& w, const PropensitySpec& spec);

}  // namespace mcm
