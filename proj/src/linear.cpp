#include "linear.hpp"

#include "error.hpp"

#include <cmath>

namespace mcm {

Vector LinearModel::predict(const Matrix& x) const {
  return (x * coef).array() + intercept;
}

LinearModel fit_ridge(const Matrix& x, const Vector& y, const RidgeSpec& spec) {
  require(spec.lambda >= 0.0, "ridge lambda must be non-negative");
  require(x.rows() == y.size(), "design/target row mismatch");
  require(x.rows() >= 1, "ridge needs at least one row");

  LinearModel m;
  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(x.cols());
  double y_mean = 0.0;
  if (spec.fit_intercept) {
    x_mean = x.colwise().mean();
    y_mean = y.mean();
  }
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;

  if (x.cols() == 0) {
    m.coef = Vector(0);
  } else if (spec.lambda > 0.0) {
    Matrix gram = xc.transpose() * xc;
    gram.diagonal().array() += spec.lambda;
    m.coef = gram.llt().solve(xc.transpose() * yc);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
    m.coef = cod.solve(yc);
    m.used_pseudo_inverse = cod.rank() < x.cols();
  }
  m.intercept = y_mean - x_mean.dot(m.coef);
  return m;
}

void PropensitySpec::validate() const {
  require(l2 >= 0.0, "propensity l2 must be non-negative");
  require(clip_delta > 0.0 && clip_delta < 0.5, "clip delta must lie in (0, 0.5)");
  require(max_iter >= 1, "propensity max_iter must be >= 1");
}

Vector LogisticModel::predict_raw(const Matrix& x) const {
  const Vector eta = (x * coef).array() + intercept;
  return eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
}

Vector LogisticModel::predict(const Matrix& x) const {
  return predict_raw(x).cwiseMax(clip_delta).cwiseMin(1.0 - clip_delta);
}

namespace {

double log1pexp(double e) { return e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)); }

double penalized_nll(const Matrix& xa, const Vector& w, const Vector& beta, double l2) {
  const Vector eta = xa * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) s += log1pexp(eta(i)) - w(i) * eta(i);
  return s + l2 * beta.tail(beta.size() - 1).squaredNorm();
}

}  // namespace

LogisticModel fit_logistic(const Matrix& x, const Vector& w, const PropensitySpec& spec) {
  spec.validate();
  require(x.rows() == w.size(), "design/treatment row mismatch");
  const double mean_w = w.mean();
  if (!(mean_w > 0.0 && mean_w < 1.0)) fail(ErrorKind::Overlap, "propensity model needs both treatment arms");

  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols() + 1;
  Matrix xa(n, p);
  xa.col(0).setOnes();
  xa.rightCols(p - 1) = x;

  Vector beta = Vector::Zero(p);
  beta(0) = std::log(mean_w / (1.0 - mean_w));
  double obj = penalized_nll(xa, w, beta, spec.l2);

  LogisticModel m;
  m.clip_delta = spec.clip_delta;
  for (int it = 0; it < spec.max_iter; ++it) {
    const Vector eta = xa * beta;
    const Vector prob = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    const Vector weight = (prob.array() * (1.0 - prob.array())).max(1e-12);

    Vector grad = xa.transpose() * (prob - w);
    grad.tail(p - 1) += 2.0 * spec.l2 * beta.tail(p - 1);
    Matrix hess = xa.transpose() * weight.asDiagonal() * xa;
    hess.diagonal().tail(p - 1).array() += 2.0 * spec.l2;
    hess.diagonal().array() += 1e-12;
    const Vector step = hess.ldlt().solve(grad);

    double t = 1.0;
    Vector next = beta - step;
    double next_obj = penalized_nll(xa, w, next, spec.l2);
    while (!(next_obj <= obj) && t > 1e-10) {
      t *= 0.5;
      next = beta - t * step;
      next_obj = penalized_nll(xa, w, next, spec.l2);
    }
    m.iterations = it + 1;
    const double change = (next - beta).cwiseAbs().maxCoeff();
    if (next_obj <= obj) {
      beta = next;
      obj = next_obj;
    }
    if (change < spec.tol || t <= 1e-10) {
      m.converged = change < spec.tol;
      break;
    }
  }
  m.intercept = beta(0);
  m.coef = beta.tail(p - 1);
  return m;
}

}  // namespace mcm
