#include "learners.hpp"

#include "error.hpp"

namespace mcm {

std::string_view base_name(BaseKind k) { return k == BaseKind::Ridge ? "ridge" : "gbt"; }

std::optional<BaseKind> parse_base(std::string_view s) {
  if (s == "ridge") return BaseKind::Ridge;
  if (s == "gbt") return BaseKind::Gbt;
  return std::nullopt;
}

std::string_view learner_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::T: return "t";
    case LearnerKind::DR: return "dr";
    case LearnerKind::X: return "x";
  }
  return "?";
}

std::optional<LearnerKind> parse_learner(std::string_view s) {
  for (auto k : kAllLearners)
    if (s == learner_name(k)) return k;
  return std::nullopt;
}

namespace {

class RidgeRegressor final : public Regressor {
 public:
  RidgeRegressor(Encoder enc, LinearModel m) : enc_(std::move(enc)), m_(std::move(m)) {}
  Vector predict(const MaskedMatrix& x) const override { return m_.predict(enc_.encode_values(x)); }

 private:
  Encoder enc_;
  LinearModel m_;
};

class GbtRegressor final : public Regressor {
 public:
  explicit GbtRegressor(GbtModel m) : m_(std::move(m)) {}
  Vector predict(const MaskedMatrix& x) const override { return m_.predict(x); }

 private:
  GbtModel m_;
};

class TModel final : public CateModel {
 public:
  TModel(std::shared_ptr<const Regressor> mu0, std::shared_ptr<const Regressor> mu1)
      : mu0_(std::move(mu0)), mu1_(std::move(mu1)) {}
  Vector predict(const MaskedMatrix& x) const override { return mu1_->predict(x) - mu0_->predict(x); }

 private:
  std::shared_ptr<const Regressor> mu0_, mu1_;
};

class SingleModel final : public CateModel {
 public:
  explicit SingleModel(std::shared_ptr<const Regressor> tau) : tau_(std::move(tau)) {}
  Vector predict(const MaskedMatrix& x) const override { return tau_->predict(x); }

 private:
  std::shared_ptr<const Regressor> tau_;
};

class XModel final : public CateModel {
 public:
  XModel(std::shared_ptr<const Regressor> tau0, std::shared_ptr<const Regressor> tau1,
         std::shared_ptr<const PropensityModel> e)
      : tau0_(std::move(tau0)), tau1_(std::move(tau1)), e_(std::move(e)) {}
  Vector predict(const MaskedMatrix& x) const override {
    const Vector e = e_->predict(x);
    return e.cwiseProduct(tau0_->predict(x)) + (1.0 - e.array()).matrix().cwiseProduct(tau1_->predict(x));
  }

 private:
  std::shared_ptr<const Regressor> tau0_, tau1_;
  std::shared_ptr<const PropensityModel> e_;
};

void require_propensity(const Nuisances& nu) {
  require(nu.e != nullptr, "this learner needs a fitted propensity model");
}

}  // namespace

std::shared_ptr<const Regressor> fit_regressor(const BaseSpec& spec, const MaskedMatrix& x, const Vector& y,
                                               Rng& rng) {
  require(x.rows() == y.size(), "design/target row mismatch");
  if (spec.kind == BaseKind::Ridge) {
    Encoder enc(x);
    LinearModel m = fit_ridge(enc.encode_values(x), y, spec.ridge);
    return std::make_shared<RidgeRegressor>(std::move(enc), std::move(m));
  }
  return std::make_shared<GbtRegressor>(fit_gbt(x, y, spec.gbt, rng));
}

std::shared_ptr<const PropensityModel> fit_propensity(const MaskedMatrix& x, const std::vector<int>& w,
                                                      const PropensitySpec& spec) {
  require(static_cast<std::size_t>(x.rows()) == w.size(), "design/treatment row mismatch");
  Encoder enc(x);
  Vector wv(x.rows());
  for (Eigen::Index i = 0; i < wv.size(); ++i) wv(i) = w[static_cast<std::size_t>(i)];
  LogisticModel m = fit_logistic(enc.encode_values(x), wv, spec);
  return std::make_shared<PropensityModel>(std::move(enc), std::move(m));
}

std::vector<std::size_t> arm_rows(const std::vector<int>& w, int arm) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] == arm) out.push_back(i);
  if (out.empty()) fail(ErrorKind::Overlap, "treatment arm " + std::to_string(arm) + " is empty");
  return out;
}

Nuisances fit_nuisances(const MaskedMatrix& x, const std::vector<int>& w, const Vector& y, const BaseSpec& base,
                        const PropensitySpec* propensity, Rng& rng) {
  require(static_cast<std::size_t>(x.rows()) == w.size() && x.rows() == y.size(), "row count mismatch");
  const auto r0 = arm_rows(w, 0);
  const auto r1 = arm_rows(w, 1);
  Nuisances nu;
  nu.mu0 = fit_regressor(base, x.select_rows(r0), take(y, r0), rng);
  nu.mu1 = fit_regressor(base, x.select_rows(r1), take(y, r1), rng);
  if (propensity) nu.e = fit_propensity(x, w, *propensity);
  return nu;
}

Vector aipw_pseudo_outcomes(const Nuisances& nu, const MaskedMatrix& x, const std::vector<int>& w, const Vector& y) {
  require_propensity(nu);
  const Vector m0 = nu.mu0->predict(x);
  const Vector m1 = nu.mu1->predict(x);
  const Vector e = nu.e->predict(x);
  Vector phi(x.rows());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const int wi = w[static_cast<std::size_t>(i)];
    phi(i) = m1(i) - m0(i) + (wi == 1 ? (y(i) - m1(i)) / e(i) : -(y(i) - m0(i)) / (1.0 - e(i)));
  }
  return phi;
}

std::shared_ptr<const CateModel> fit_t_learner(const Nuisances& nu) {
  require(nu.mu0 && nu.mu1, "T-learner needs both arm models");
  return std::make_shared<TModel>(nu.mu0, nu.mu1);
}

std::shared_ptr<const CateModel> fit_dr_learner(const Nuisances& nu, const MaskedMatrix& x, const std::vector<int>& w,
                                                const Vector& y, const MetaLearnerSpec& spec, Rng& rng) {
  Vector phi;
  if (!spec.cross_fit) {
    phi = aipw_pseudo_outcomes(nu, x, w, y);
  } else {
    // Alternate rows between two folds; each fold's pseudo-outcomes come from
    // nuisances fitted on the other fold.
    phi.resize(x.rows());
    std::vector<std::size_t> fold[2];
    for (std::size_t i = 0; i < w.size(); ++i) fold[i % 2].push_back(i);
    for (int k = 0; k < 2; ++k) {
      const auto& fit_rows = fold[1 - k];
      const auto& eval_rows = fold[k];
      const MaskedMatrix xf = x.select_rows(fit_rows);
      const auto wf = take(std::span<const int>(w), std::span<const std::size_t>(fit_rows));
      const Nuisances nf = fit_nuisances(xf, wf, take(y, fit_rows), spec.base, &spec.propensity, rng);
      const auto we = take(std::span<const int>(w), std::span<const std::size_t>(eval_rows));
      const Vector pe = aipw_pseudo_outcomes(nf, x.select_rows(eval_rows), we, take(y, eval_rows));
      for (std::size_t r = 0; r < eval_rows.size(); ++r)
        phi(static_cast<Eigen::Index>(eval_rows[r])) = pe(static_cast<Eigen::Index>(r));
    }
  }
  return std::make_shared<SingleModel>(fit_regressor(spec.base, x, phi, rng));
}

std::shared_ptr<const CateModel> fit_x_learner(const Nuisances& nu, const MaskedMatrix& x, const std::vector<int>& w,
                                               const Vector& y, const MetaLearnerSpec& spec, Rng& rng) {
  require_propensity(nu);
  const auto r0 = arm_rows(w, 0);
  const auto r1 = arm_rows(w, 1);
  const MaskedMatrix x0 = x.select_rows(r0);
  const MaskedMatrix x1 = x.select_rows(r1);
  const Vector d1 = take(y, r1) - nu.mu0->predict(x1);
  const Vector d0 = nu.mu1->predict(x0) - take(y, r0);
  auto tau1 = fit_regressor(spec.base, x1, d1, rng);
  auto tau0 = fit_regressor(spec.base, x0, d0, rng);
  return std::make_shared<XModel>(std::move(tau0), std::move(tau1), nu.e);
}

std::shared_ptr<const CateModel> fit_meta_learner(const MaskedMatrix& x, const std::vector<int>& w, const Vector& y,
                                                  const MetaLearnerSpec& spec, Rng& rng) {
  const bool needs_e = spec.kind != LearnerKind::T;
  const Nuisances nu = fit_nuisances(x, w, y, spec.base, needs_e ? &spec.propensity : nullptr, rng);
  switch (spec.kind) {
    case LearnerKind::T: return fit_t_learner(nu);
    case LearnerKind::DR: return fit_dr_learner(nu, x, w, y, spec, rng);
    case LearnerKind::X: return fit_x_learner(nu, x, w, y, spec, rng);
  }
  return nullptr;
}

double estimate_ate(const CateModel& model, const MaskedMatrix& x_eval) {
  if (x_eval.rows() == 0) fail(ErrorKind::Overlap, "empty evaluation set");
  return model.predict(x_eval).mean();
}

}  // namespace mcm
