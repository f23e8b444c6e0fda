#include "datagen.hpp"

#include "error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mcm {

void DgpConfig::validate() const {
  require(n > 0, "n must be positive");
  require(z_dim > 0 && z_dim < d, "z_dim must satisfy 0 < z_dim < d");
  require(d - z_dim >= 2, "the Z_in block needs at least 2 columns");
  require(z_dim >= 2, "the Z_out block needs at least 2 columns");
  require(missingness_rate >= 0.0 && missingness_rate < 1.0, "missingness_rate must lie in [0, 1)");
}

double SyntheticDataset::true_ate() const {
  require(has_truth(), "dataset carries no ground-truth effects");
  return cate.mean();
}

void SyntheticDataset::validate() const {
  const auto rows = static_cast<Eigen::Index>(n());
  const auto cols = static_cast<Eigen::Index>(d());
  const auto zd = static_cast<Eigen::Index>(z_dim);
  require(z_dim > 0 && z_dim < d(), "z_dim out of range");
  require(z_out_mask.rows() == rows && z_out_mask.cols() == zd, "z_out_mask shape mismatch");
  require(z_in_mask.rows() == rows && z_in_mask.cols() == cols - zd, "z_in_mask shape mismatch");
  require(w.size() == n() && y.size() == rows, "w/y length mismatch");
  for (int wi : w) require(wi == 0 || wi == 1, "treatment must be binary");
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const bool m = j < zd ? z_out_mask(i, j) : z_in_mask(i, j - zd);
      require(x_obs.observed(i, j) == m, "x_obs absence disagrees with mask at (" + std::to_string(i) + "," +
                                             std::to_string(j) + ")");
      if (x_full.size() > 0 && m) require(x_obs.value(i, j) == x_full(i, j), "x_obs differs from x_full");
    }
  }
  if (has_truth()) {
    require(y0.size() == rows && y1.size() == rows, "potential outcome length mismatch");
    for (Eigen::Index i = 0; i < rows; ++i) require(cate(i) == y1(i) - y0(i), "cate != y1 - y0");
  }
}

long round_half_away(double v) { return std::lround(v); }

double normal_quantile(double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

Matrix generate_covariates(std::size_t d, std::size_t n, Rng& rng) {
  require(d > 0 && n > 0, "generate_covariates needs d, n > 0");
  const auto dd = static_cast<Eigen::Index>(d);
  Matrix a(dd, dd);
  for (Eigen::Index i = 0; i < dd; ++i)
    for (Eigen::Index j = 0; j < dd; ++j) a(i, j) = rng.uniform();
  Matrix cov = a * a.transpose();

  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) fail(ErrorKind::InvalidArgument, "covariance factorization failed");
  }
  const Matrix l = llt.matrixL();

  Matrix x(static_cast<Eigen::Index>(n), dd);
  Vector z(dd);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < dd; ++j) z(j) = rng.normal();
    x.row(i) = (l * z).transpose();
  }
  const double range = x.maxCoeff() - x.minCoeff();
  if (range > 0) x /= range;
  return x;
}

std::size_t z_out_missing_per_row(double rate, std::size_t z_dim) {
  return static_cast<std::size_t>(std::max(round_half_away(rate * static_cast<double>(z_dim)), 1L));
}

Mask sample_z_out(const Matrix& x, std::size_t z_dim, double rate) {
  require(rate >= 0.0 && rate < 1.0, "rate must lie in [0, 1)");
  require(z_dim > 0 && static_cast<Eigen::Index>(z_dim) <= x.cols(), "z_dim out of range");
  const std::size_t k = std::min(z_out_missing_per_row(rate, z_dim), z_dim);
  const auto zd = static_cast<Eigen::Index>(z_dim);
  Mask observed(x.rows(), zd);
  std::vector<double> row(z_dim);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < zd; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    // k-th largest value is the threshold; everything at or above it is dropped.
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end(), std::greater<>());
    const double border = row[k - 1];
    for (Eigen::Index j = 0; j < zd; ++j) observed(i, j) = !(x(i, j) >= border);
  }
  return observed;
}

std::vector<int> assign_treatment(const Mask& z_out_mask, Rng& rng) {
  require(z_out_mask.cols() >= 2, "assign_treatment needs at least 2 Z_out columns");
  const Eigen::Index zd = z_out_mask.cols();
  const Eigen::Index half = zd / 2;
  std::vector<int> w(static_cast<std::size_t>(z_out_mask.rows()));
  for (Eigen::Index i = 0; i < z_out_mask.rows(); ++i) {
    int wi;
    if (!z_out_mask(i, zd - 1)) {
      wi = 0;
    } else if (!z_out_mask.row(i).head(half).all()) {
      wi = 1;
    } else {
      wi = rng.bernoulli(0.5) ? 1 : 0;
    }
    w[static_cast<std::size_t>(i)] = wi;
  }
  return w;
}

std::size_t z_in_dim_count(double rate, std::size_t m) {
  long c = round_half_away(rate * static_cast<double>(m) * 2.0);
  c = std::max(c, 1L);
  c = std::min(c, static_cast<long>(m / 2));
  return static_cast<std::size_t>(c);
}

Mask sample_z_in(const Matrix& x, const std::vector<int>& w, double rate, std::size_t z_dim, SliceScale scale) {
  const auto zd = static_cast<Eigen::Index>(z_dim);
  require(zd > 0 && zd < x.cols(), "z_dim out of range");
  require(static_cast<Eigen::Index>(w.size()) == x.rows(), "w length must match rows");
  const auto m = static_cast<std::size_t>(x.cols() - zd);
  require(m >= 2, "the Z_in block needs at least 2 columns");
  const auto count = static_cast<Eigen::Index>(z_in_dim_count(rate, m));
  const double theta = normal_quantile(1.0 - rate);

  // The slice is always the first `count` columns of the block, also for
  // treated rows whose missingness lands in the last `count` columns.
  const auto block = x.middleCols(zd, count);
  const Eigen::RowVectorXd col_mean = block.colwise().mean();
  Eigen::RowVectorXd col_sd;
  if (scale == SliceScale::ColumnStd)
    col_sd = ((block.rowwise() - col_mean).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();

  Mask observed = Mask::Constant(x.rows(), static_cast<Eigen::Index>(m), true);
  const auto mm = static_cast<Eigen::Index>(m);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd slice = block.row(i);
    Eigen::RowVectorXd limit;
    if (scale == SliceScale::RowSlice) {
      const double mu = slice.mean();
      const double sd = std::sqrt((slice.array() - mu).square().sum() / static_cast<double>(count));
      limit = Eigen::RowVectorXd::Constant(count, theta * sd);
    } else {
      limit = theta * col_sd;
    }
    const Eigen::Index offset = w[static_cast<std::size_t>(i)] ? mm - count : 0;
    for (Eigen::Index j = 0; j < count; ++j) {
      if (slice(j) - col_mean(j) > limit(j)) observed(i, offset + j) = false;
    }
  }
  return observed;
}

OutcomeModel draw_outcome_model(std::size_t d, Rng& rng) {
  OutcomeModel m;
  m.theta.resize(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < m.theta.size(); ++j) m.theta(j) = rng.normal() / 10.0;
  m.theta_y0 = m.theta.array() + 1.0;
  m.theta_y1 = m.theta.array() - 1.0;
  return m;
}

Outcomes apply_outcome_model(const Matrix& x_full, const std::vector<int>& w, const OutcomeModel& model, Rng& rng) {
  require(static_cast<Eigen::Index>(w.size()) == x_full.rows(), "w length must match rows");
  require(model.theta_y0.size() == x_full.cols(), "outcome model dimension mismatch");
  Outcomes o;
  o.model = model;
  o.y0 = x_full * model.theta_y0;
  o.y1 = x_full * model.theta_y1;
  o.cate = o.y1 - o.y0;
  o.y.resize(x_full.rows());
  for (Eigen::Index i = 0; i < x_full.rows(); ++i) o.y(i) = w[static_cast<std::size_t>(i)] ? o.y1(i) : o.y0(i);
  for (Eigen::Index i = 0; i < x_full.rows(); ++i) o.y(i) += rng.normal() * model.noise_sd;
  return o;
}

Outcomes generate_outcomes(const Matrix& x_full, const std::vector<int>& w, Rng& rng) {
  const OutcomeModel model = draw_outcome_model(static_cast<std::size_t>(x_full.cols()), rng);
  return apply_outcome_model(x_full, w, model, rng);
}

SyntheticDataset overlay_missingness(const Matrix& x_raw, const DgpConfig& cfg, Rng& rng) {
  require(x_raw.rows() > 0, "no rows");
  require(static_cast<Eigen::Index>(cfg.z_dim) + 2 <= x_raw.cols(), "need d >= z_dim + 2");
  const auto zd = static_cast<Eigen::Index>(cfg.z_dim);
  SyntheticDataset ds;
  ds.z_dim = cfg.z_dim;
  ds.z_out_mask = sample_z_out(x_raw, cfg.z_dim, cfg.missingness_rate);
  ds.w = assign_treatment(ds.z_out_mask, rng);
  ds.z_in_mask = sample_z_in(x_raw, ds.w, cfg.missingness_rate, cfg.z_dim, cfg.z_in_scale);
  ds.x_full = x_raw.cwiseAbs();
  Outcomes o = generate_outcomes(ds.x_full, ds.w, rng);
  ds.y0 = std::move(o.y0);
  ds.y1 = std::move(o.y1);
  ds.y = std::move(o.y);
  ds.cate = std::move(o.cate);

  ds.x_obs = MaskedMatrix(ds.x_full);
  for (Eigen::Index i = 0; i < x_raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_raw.cols(); ++j) {
      const bool observed = j < zd ? ds.z_out_mask(i, j) : ds.z_in_mask(i, j - zd);
      if (!observed) ds.x_obs.clear(i, j);
    }
  }
  return ds;
}

SyntheticDataset assemble(const DgpConfig& cfg, Rng& rng) {
  cfg.validate();
  const Matrix x = generate_covariates(cfg.d, cfg.n, rng);
  return overlay_missingness(x, cfg, rng);
}

SyntheticDataset semi_real_overlay(const MaskedMatrix& covariates, const DgpConfig& cfg, Rng& rng) {
  if (covariates.absent_count() > 0)
    fail(ErrorKind::InvalidArgument, "semi-real covariates must be fully observed (drop incomplete rows first)");
  require(covariates.cols() >= static_cast<Eigen::Index>(cfg.z_dim) + 2, "need d >= z_dim + 2");
  require(cfg.missingness_rate >= 0.0 && cfg.missingness_rate < 1.0, "missingness_rate must lie in [0, 1)");
  return overlay_missingness(covariates.filled_zero(), cfg, rng);
}

}  // namespace mcm
