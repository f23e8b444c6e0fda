#include "datagen.hpp"
#include "error.hpp"
#include "gbt.hpp"
#include "learners.hpp"
#include "linear.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace mcm;

namespace {

Matrix randn(Rng& rng, Eigen::Index r, Eigen::Index c) {
  return Matrix::NullaryExpr(r, c, [&] { return rng.normal(); });
}

}  // namespace

TEST_CASE("ridge matches gradient descent and is stationary") {
  Rng rng(1);
  const Matrix x = randn(rng, 60, 5);
  Vector y = x * Vector::LinSpaced(5, -1, 1) + Vector::Constant(60, 0.7);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.3 * rng.normal();
  for (double lambda : {0.0, 0.1, 5.0}) {
    const LinearModel m = fit_ridge(x, y, {lambda, true});
    const Vector g = oracle::ridge_gradient(x, y, lambda, m.coef, m.intercept);
    CHECK(g.norm() < 1e-6);
    const Vector gd = oracle::ridge_gd(x, y, lambda);
    CHECK((gd.head(5) - m.coef).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(std::abs(gd(5) - m.intercept) < 1e-6);
  }
}

TEST_CASE("ridge satisfies the normal equations") {
  Rng rng(2);
  const Matrix x = randn(rng, 80, 6);
  const Vector y = randn(rng, 80, 1);
  const double lambda = 0.5;
  const LinearModel m = fit_ridge(x, y, {lambda, true});
  Matrix xa(80, 7);
  xa << x, Vector::Ones(80);
  Matrix lhs = xa.transpose() * xa;
  lhs.diagonal().head(6).array() += lambda;
  Vector b(7);
  b << m.coef, m.intercept;
  const Vector rhs = xa.transpose() * y;
  CHECK((lhs * b - rhs).norm() / rhs.norm() < 1e-8);
}

TEST_CASE("unpenalized ridge on a rank-deficient design uses the pseudo-inverse") {
  Matrix x(4, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8;
  const Vector y = Vector::LinSpaced(4, 1, 4);
  const LinearModel m = fit_ridge(x, y, {0.0, true});
  CHECK(m.used_pseudo_inverse);
  CHECK((m.predict(x) - y).norm() < 1e-9);
}

TEST_CASE("logistic regression is clipped and converges") {
  Rng rng(3);
  const Matrix x = randn(rng, 400, 3);
  Vector w(400);
  for (Eigen::Index i = 0; i < 400; ++i) w(i) = x(i, 0) > 0 ? 1.0 : 0.0;  // separable
  PropensitySpec spec;
  const LogisticModel m = fit_logistic(x, w, spec);
  const Vector p = m.predict(x);
  CHECK(p.minCoeff() >= spec.clip_delta);
  CHECK(p.maxCoeff() <= 1 - spec.clip_delta);
  CHECK(m.predict_raw(x).maxCoeff() > 1 - spec.clip_delta);

  Vector w2(400);
  for (Eigen::Index i = 0; i < 400; ++i) w2(i) = rng.bernoulli(1 / (1 + std::exp(-x(i, 1)))) ? 1.0 : 0.0;
  const LogisticModel m2 = fit_logistic(x, w2, spec);
  CHECK(m2.converged);
  CHECK(m2.coef(1) == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("gbt training loss never increases") {
  Rng rng(4);
  DgpConfig c;
  c.n = 800;
  c.seed = 4;
  const auto ds = generate_dataset(c);
  for (double sub : {1.0, 0.7}) {
    GbtSpec spec;
    spec.n_trees = 60;
    spec.subsample = sub;
    const GbtModel m = fit_gbt(ds.x_obs, ds.y, spec, rng);
    const auto& loss = m.training_loss();
    REQUIRE(loss.size() == 61);
    if (sub == 1.0)
      for (std::size_t k = 1; k < loss.size(); ++k) CHECK(loss[k] <= loss[k - 1] * (1 + 1e-12));
    CHECK(loss.back() < loss.front());
  }
}

TEST_CASE("a depth-one tree finds the best split") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 60;
    MaskedMatrix x(randn(rng, n, 3));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < 3; ++j)
        if (rng.bernoulli(0.2)) x.clear(i, j);
    Vector y = randn(rng, n, 1);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!x.observed(i, trial % 3)) y(i) += 1.5;
    GbtSpec spec;
    spec.n_trees = 1;
    spec.max_depth = 1;
    spec.learning_rate = 1.0;
    spec.min_leaf = 1;
    const GbtModel m = fit_gbt(x, y, spec, rng);
    const auto best = oracle::best_split(x, y, 1);
    const TreeNode& root = m.trees().at(0).nodes.at(0);
    CHECK(m.training_loss()[1] == doctest::Approx(best.sse).epsilon(1e-9));
    CHECK(root.feature == best.feature);
    if (std::isinf(best.threshold)) CHECK(std::isinf(root.threshold));
    else CHECK(root.threshold == doctest::Approx(best.threshold).epsilon(1e-12));
  }
}

TEST_CASE("unseen missing cells go right") {
  Matrix v(6, 1);
  v << 1, 2, 3, 10, 11, 12;
  Vector y(6);
  y << 0, 0, 0, 5, 5, 5;
  Rng rng(6);
  GbtSpec spec;
  spec.n_trees = 1;
  spec.max_depth = 1;
  spec.learning_rate = 1.0;
  spec.min_leaf = 1;
  const GbtModel m = fit_gbt(MaskedMatrix(v), y, spec, rng);
  MaskedMatrix q(1, 1);
  CHECK(m.predict(q)(0) == doctest::Approx(5.0));
}

TEST_CASE("gbt is deterministic given the seed") {
  DgpConfig c;
  c.n = 500;
  c.seed = 7;
  const auto ds = generate_dataset(c);
  GbtSpec spec;
  spec.n_trees = 20;
  spec.subsample = 0.8;
  Rng a(1), b(1);
  CHECK(fit_gbt(ds.x_obs, ds.y, spec, a).predict(ds.x_obs) == fit_gbt(ds.x_obs, ds.y, spec, b).predict(ds.x_obs));
}

TEST_CASE("gbt spec validation") {
  GbtSpec s;
  s.n_trees = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.learning_rate = 0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = {};
  s.subsample = 1.5;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("t-learner on duplicated arms estimates zero") {
  Rng rng(8);
  const Matrix x = randn(rng, 150, 4);
  const Vector y = randn(rng, 150, 1);
  Matrix x2(300, 4);
  x2 << x, x;
  Vector y2(300);
  y2 << y, y;
  std::vector<int> w(300, 0);
  std::fill(w.begin() + 150, w.end(), 1);
  for (BaseKind k : {BaseKind::Ridge, BaseKind::Gbt}) {
    MetaLearnerSpec spec;
    spec.base.kind = k;
    spec.base.gbt.n_trees = 30;
    Rng r(9);
    const auto model = fit_meta_learner(MaskedMatrix(x2), w, y2, spec, r);
    CHECK(model->predict(MaskedMatrix(x)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("meta-learners recover a constant effect") {
  Rng rng(10);
  const Eigen::Index n = 2000;
  const Matrix x = randn(rng, n, 3);
  std::vector<int> w(n);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = rng.bernoulli(1 / (1 + std::exp(-x(i, 0)))) ? 1 : 0;
    y(i) = x(i, 0) + 0.5 * x(i, 1) + 2.0 * w[i] + 0.1 * rng.normal();
  }
  const MaskedMatrix xm(x);
  for (LearnerKind k : kAllLearners) {
    MetaLearnerSpec spec;
    spec.kind = k;
    spec.base.kind = BaseKind::Ridge;
    Rng r(11);
    const auto model = fit_meta_learner(xm, w, y, spec, r);
    CHECK(estimate_ate(*model, xm) == doctest::Approx(2.0).epsilon(0.02));
  }
  MetaLearnerSpec cf;
  cf.kind = LearnerKind::DR;
  cf.base.kind = BaseKind::Ridge;
  cf.cross_fit = true;
  Rng r(12);
  CHECK(estimate_ate(*fit_meta_learner(xm, w, y, cf, r), xm) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("aipw pseudo-outcomes are unbiased with correct nuisances") {
  Rng rng(13);
  const Eigen::Index n = 4000;
  const Matrix x = randn(rng, n, 2);
  std::vector<int> w(n);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = rng.bernoulli(0.5) ? 1 : 0;
    y(i) = x(i, 0) + (1.0 + x(i, 1)) * w[i] + 0.1 * rng.normal();
  }
  BaseSpec base;
  base.kind = BaseKind::Ridge;
  PropensitySpec ps;
  Rng r(14);
  const Nuisances nu = fit_nuisances(MaskedMatrix(x), w, y, base, &ps, r);
  const Vector phi = aipw_pseudo_outcomes(nu, MaskedMatrix(x), w, y);
  CHECK(phi.mean() == doctest::Approx(1.0 + x.col(1).mean()).epsilon(0.05));
}

TEST_CASE("single-arm data is an overlap error") {
  std::vector<int> w(10, 1);
  CHECK_THROWS_AS(arm_rows(w, 0), Error);
  Rng rng(15);
  const Matrix x = randn(rng, 10, 2);
  MetaLearnerSpec spec;
  spec.base.kind = BaseKind::Ridge;
  try {
    fit_meta_learner(MaskedMatrix(x), w, Vector::Zero(10), spec, rng);
    FAIL("expected an overlap error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Overlap);
  }
  CHECK_THROWS_AS(estimate_ate(*fit_t_learner({}), MaskedMatrix(0, 2)), Error);
}

TEST_CASE("propensity on incomplete rows stays inside the clip band") {
  DgpConfig c;
  c.n = 1000;
  c.seed = 16;
  const auto ds = generate_dataset(c);
  PropensitySpec spec;
  const auto e = fit_propensity(ds.x_obs, ds.w, spec);
  const Vector p = e->predict(ds.x_obs);
  CHECK(p.minCoeff() >= spec.clip_delta);
  CHECK(p.maxCoeff() <= 1 - spec.clip_delta);
}

TEST_CASE("learner name parsing") {
  for (auto k : kAllLearners) CHECK(parse_learner(learner_name(k)) == k);
  CHECK(parse_base("ridge") == BaseKind::Ridge);
  CHECK(parse_base("gbt") == BaseKind::Gbt);
  CHECK_FALSE(parse_learner("s").has_value());
}
