#include "impute.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace mcm {

std::string_view scope_name(ImputationScope s) {
  switch (s) {
    case ImputationScope::All: return "all";
    case ImputationScope::Nothing: return "nothing";
    case ImputationScope::Selective: return "selective";
    case ImputationScope::SelectiveComplement: return "complement";
  }
  return "?";
}

std::optional<ImputationScope> parse_scope(std::string_view s) {
  for (auto sc : kAllScopes)
    if (s == scope_name(sc)) return sc;
  if (s == "selective_complement" || s == "selective-complement") return ImputationScope::SelectiveComplement;
  return std::nullopt;
}

std::vector<std::size_t> scope_columns(ImputationScope scope, std::size_t z_dim, std::size_t d) {
  require(z_dim > 0 && z_dim < d, "scope needs 0 < z_dim < d");
  std::size_t lo = 0, hi = 0;
  switch (scope) {
    case ImputationScope::All: lo = 0, hi = d; break;
    case ImputationScope::Nothing: break;
    case ImputationScope::Selective: lo = z_dim, hi = d; break;
    case ImputationScope::SelectiveComplement: lo = 0, hi = z_dim; break;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = lo; j < hi; ++j) out.push_back(j);
  return out;
}

std::string_view method_name(ImputeMethod m) { return m == ImputeMethod::Mice ? "mice" : "mean"; }

std::optional<ImputeMethod> parse_method(std::string_view s) {
  if (s == "mice") return ImputeMethod::Mice;
  if (s == "mean") return ImputeMethod::Mean;
  return std::nullopt;
}

void MiceConfig::validate() const {
  require(sweeps >= 1, "mice sweeps must be >= 1");
  require(ridge_lambda >= 0.0, "mice ridge_lambda must be >= 0");
  require(tol >= 0.0, "mice tol must be >= 0");
}

namespace {

// Absent cells of x replaced by means (0 for columns in zero_cols).
Matrix mean_filled(const MaskedMatrix& x, const Vector& means) {
  Matrix cur = x.filled_zero();
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!x.observed(i, j)) cur(i, j) = means(j);
  return cur;
}

// All columns but `skip`, for the given rows (or all rows when rows is null).
Matrix drop_column(const Matrix& m, std::size_t skip, const std::vector<Eigen::Index>* rows) {
  const Eigen::Index n = rows ? static_cast<Eigen::Index>(rows->size()) : m.rows();
  const auto s = static_cast<Eigen::Index>(skip);
  Matrix out(n, m.cols() - 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index src = rows ? (*rows)[static_cast<std::size_t>(r)] : r;
    out.row(r).head(s) = m.row(src).head(s);
    out.row(r).tail(m.cols() - 1 - s) = m.row(src).tail(m.cols() - 1 - s);
  }
  return out;
}

MaskedMatrix with_columns_filled(const MaskedMatrix& x, const Matrix& cur, const std::vector<std::size_t>& cols) {
  MaskedMatrix out = x;
  for (std::size_t j : cols) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!x.observed(i, jj)) out.set(i, jj, cur(i, jj));
  }
  return out;
}

}  // namespace

ImputerModel fit_imputer(ImputeMethod method, const MaskedMatrix& x, const std::vector<std::size_t>& columns,
                         const MiceConfig& cfg, Rng& rng, MaskedMatrix* fitted_out) {
  cfg.validate();
  const Eigen::Index d = x.cols();
  for (std::size_t j : columns) require(static_cast<Eigen::Index>(j) < d, "impute column out of range");

  ImputerModel m;
  m.columns_ = columns;
  m.stochastic_ = cfg.stochastic;
  m.means_ = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = 0.0;
    Eigen::Index c = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (x.observed(i, j)) s += x.value(i, j), ++c;
    if (c > 0) m.means_(j) = s / static_cast<double>(c);
  }
  std::vector<std::size_t> targets;
  for (std::size_t j : columns) {
    const auto absent = x.absent_in_column(static_cast<Eigen::Index>(j));
    if (absent == static_cast<std::size_t>(x.rows()) && absent > 0) {
      m.fallback_.push_back(j);
    } else if (absent > 0) {
      targets.push_back(j);
    }
  }

  Matrix cur = mean_filled(x, m.means_);
  if (method == ImputeMethod::Mice && d >= 2) {
    for (int sweep = 0; sweep < cfg.sweeps && !targets.empty(); ++sweep) {
      std::vector<ImputerModel::Step> steps;
      double max_change = 0.0;
      double objective = 0.0;
      for (std::size_t j : targets) {
        const auto jj = static_cast<Eigen::Index>(j);
        std::vector<Eigen::Index> obs, miss;
        for (Eigen::Index i = 0; i < x.rows(); ++i) (x.observed(i, jj) ? obs : miss).push_back(i);
        const Matrix xo = drop_column(cur, j, &obs);
        Vector yo(static_cast<Eigen::Index>(obs.size()));
        for (std::size_t r = 0; r < obs.size(); ++r) yo(static_cast<Eigen::Index>(r)) = cur(obs[r], jj);
        ImputerModel::Step st{j, fit_ridge(xo, yo, RidgeSpec{cfg.ridge_lambda, true}), 0.0};
        const double rss = (yo - st.model.predict(xo)).squaredNorm();
        objective += rss;
        st.residual_sd = std::sqrt(rss / static_cast<double>(obs.size()));
        const Vector pred = st.model.predict(drop_column(cur, j, &miss));
        for (std::size_t r = 0; r < miss.size(); ++r) {
          double v = pred(static_cast<Eigen::Index>(r));
          if (cfg.stochastic) v += st.residual_sd * rng.normal();
          max_change = std::max(max_change, std::abs(v - cur(miss[r], jj)));
          cur(miss[r], jj) = v;
        }
        steps.push_back(std::move(st));
      }
      m.sweeps_.push_back(std::move(steps));
      m.objective_.push_back(objective);
      if (max_change < cfg.tol) break;
    }
  }
  for (std::size_t j : m.fallback_) cur.col(static_cast<Eigen::Index>(j)).setZero();
  if (fitted_out) *fitted_out = with_columns_filled(x, cur, columns);
  return m;
}

MaskedMatrix ImputerModel::transform(const MaskedMatrix& x, Rng& rng) const {
  require(x.cols() == means_.size(), "imputer applied to a matrix of different width");
  Matrix cur = mean_filled(x, means_);
  for (const auto& steps : sweeps_) {
    for (const auto& st : steps) {
      const auto jj = static_cast<Eigen::Index>(st.target);
      std::vector<Eigen::Index> miss;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (!x.observed(i, jj)) miss.push_back(i);
      if (miss.empty()) continue;
      const Vector pred = st.model.predict(drop_column(cur, st.target, &miss));
      for (std::size_t r = 0; r < miss.size(); ++r) {
        double v = pred(static_cast<Eigen::Index>(r));
        if (stochastic_) v += st.residual_sd * rng.normal();
        cur(miss[r], jj) = v;
      }
    }
  }
  for (std::size_t j : fallback_) cur.col(static_cast<Eigen::Index>(j)).setZero();
  return with_columns_filled(x, cur, columns_);
}

ImputeResult mean_impute(const MaskedMatrix& x, const std::vector<std::size_t>& columns) {
  Rng unused(0);
  ImputeResult r;
  const ImputerModel m = fit_imputer(ImputeMethod::Mean, x, columns, MiceConfig{}, unused, &r.x);
  r.fallback_columns = m.fallback_columns();
  return r;
}

ImputeResult mice_impute(const MaskedMatrix& x, const std::vector<std::size_t>& columns, const MiceConfig& cfg,
                         Rng& rng) {
  ImputeResult r;
  const ImputerModel m = fit_imputer(ImputeMethod::Mice, x, columns, cfg, rng, &r.x);
  r.fallback_columns = m.fallback_columns();
  return r;
}

Encoder::Encoder(const MaskedMatrix& x, std::vector<std::size_t> imputed_columns)
    : d_(static_cast<std::size_t>(x.cols())), imputed_(std::move(imputed_columns)) {
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (x.absent_in_column(j) > 0) indicated_.push_back(static_cast<std::size_t>(j));
}

Matrix Encoder::encode_values(const MaskedMatrix& x) const {
  require(static_cast<std::size_t>(x.cols()) == d_, "encoder applied to a matrix of different width");
  Matrix out(x.rows(), static_cast<Eigen::Index>(width()));
  out.leftCols(x.cols()) = x.filled_zero();
  for (std::size_t k = 0; k < indicated_.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(indicated_[k]);
    const auto c = static_cast<Eigen::Index>(d_ + k);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, c) = x.observed(i, j) ? 0.0 : 1.0;
  }
  return out;
}

DesignMatrix Encoder::encode(const MaskedMatrix& x) const {
  DesignMatrix dm;
  dm.values = encode_values(x);
  dm.column_provenance.assign(width(), Provenance::Original);
  for (std::size_t j : imputed_)
    if (j < d_) dm.column_provenance[j] = Provenance::Imputed;
  for (std::size_t k = 0; k < indicated_.size(); ++k) {
    dm.indicator_columns[indicated_[k]] = d_ + k;
    dm.column_provenance[d_ + k] = Provenance::Indicator;
  }
  return dm;
}

}  // namespace mcm
