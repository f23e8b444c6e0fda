#pragma once

#include "gbt.hpp"
#include "impute.hpp"
#include "linear.hpp"
#include "masked_matrix.hpp"
#include "rng.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace mcm {

enum class BaseKind { Ridge, Gbt };
enum class LearnerKind { T, DR, X };

inline constexpr LearnerKind kAllLearners[] = {LearnerKind::T, LearnerKind::DR, LearnerKind::X};

std::string_view base_name(BaseKind k);
std::optional<BaseKind> parse_base(std::string_view s);
std::string_view learner_name(LearnerKind k);  // "t", "dr", "x"
std::optional<LearnerKind> parse_learner(std::string_view s);

// How the DR learner reports its ATE: mean of the second-stage CATE
// predictions, or the AIPW mean of pseudo-outcomes on the evaluation rows.
enum class DrAte { Plugin, Aipw };

struct BaseSpec {
  BaseKind kind = BaseKind::Gbt;
  RidgeSpec ridge;
  GbtSpec gbt;
};

struct MetaLearnerSpec {
  LearnerKind kind = LearnerKind::T;
  BaseSpec base;
  PropensitySpec propensity;
  DrAte dr_ate = DrAte::Plugin;
  bool cross_fit = false;  // DR: 2-fold cross-fitted nuisances
};

// Outcome regressor over possibly incomplete rows. Ridge sees the zero-fill +
// indicator encoding fixed at fit time; GBT routes absent cells natively.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual Vector predict(const MaskedMatrix& x) const = 0;
};

std::shared_ptr<const Regressor> fit_regressor(const BaseSpec& spec, const MaskedMatrix& x, const Vector& y,
                                               Rng& rng);

class PropensityModel {
 public:
  PropensityModel(Encoder enc, LogisticModel model) : enc_(std::move(enc)), model_(std::move(model)) {}
  // Clipped into [delta, 1 - delta].
  Vector predict(const MaskedMatrix& x) const { return model_.predict(enc_.encode_values(x)); }
  const LogisticModel& logistic() const { return model_; }

 private:
  Encoder enc_;
  LogisticModel model_;
};

// Logistic regression on the indicator-encoded design.
std::shared_ptr<const PropensityModel> fit_propensity(const MaskedMatrix& x, const std::vector<int>& w,
                                                      const PropensitySpec& spec);

// First-stage models shared by T, DR and X on the same training data.
struct Nuisances {
  std::shared_ptr<const Regressor> mu0, mu1;
  std::shared_ptr<const PropensityModel> e;  // null when not fitted
};

// Rows of x whose treatment equals arm; throws Overlap when none.
std::vector<std::size_t> arm_rows(const std::vector<int>& w, int arm);

Nuisances fit_nuisances(const MaskedMatrix& x, const std::vector<int>& w, const Vector& y, const BaseSpec& base,
                        const PropensitySpec* propensity, Rng& rng);

class CateModel {
 public:
  virtual ~CateModel() = default;
  virtual Vector predict(const MaskedMatrix& x) const = 0;
};

// AIPW pseudo-outcome mu1 - mu0 + w (y - mu1) / e - (1 - w) (y - mu0) / (1 - e).
Vector aipw_pseudo_outcomes(const Nuisances& nu, const MaskedMatrix& x, const std::vector<int>& w, const Vector& y);

std::shared_ptr<const CateModel> fit_t_learner(const Nuisances& nu);
std::shared_ptr<const CateModel> fit_dr_learner(const Nuisances& nu, const MaskedMatrix& x, const std::vector<int>& w,
                                                const Vector& y, const MetaLearnerSpec& spec, Rng& rng);
std::shared_ptr<const CateModel> fit_x_learner(const Nuisances& nu, const MaskedMatrix& x, const std::vector<int>& w,
                                               const Vector& y, const MetaLearnerSpec& spec, Rng& rng);

// Convenience entry point fitting its own nuisances.
std::shared_ptr<const CateModel> fit_meta_learner(const MaskedMatrix& x, const std::vector<int>& w, const Vector& y,
                                                  const MetaLearnerSpec& spec, Rng& rng);

// Mean predicted CATE over the evaluation rows.
double estimate_ate(const CateModel& model, const MaskedMatrix& x_eval);

}  // namespace mcm
