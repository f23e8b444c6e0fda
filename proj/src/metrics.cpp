#include "metrics.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace mcm {

double pehe(const Vector& true_cate, const Vector& est_cate) {
  require(true_cate.size() == est_cate.size(), "pehe: length mismatch");
  require(true_cate.size() >= 1, "pehe: empty input");
  return (true_cate - est_cate).squaredNorm() / static_cast<double>(true_cate.size());
}

double pehe_by_arm(const Vector& true_cate, const Vector& est_cate, const std::vector<int>& w, int arm) {
  require(true_cate.size() == est_cate.size() && static_cast<std::size_t>(true_cate.size()) == w.size(),
          "pehe_by_arm: length mismatch");
  double s = 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != arm) continue;
    const double e = true_cate(static_cast<Eigen::Index>(i)) - est_cate(static_cast<Eigen::Index>(i));
    s += e * e;
    ++c;
  }
  if (c == 0) fail(ErrorKind::Overlap, "pehe_by_arm: arm " + std::to_string(arm) + " is empty");
  return s / static_cast<double>(c);
}

double ate_sq_err(double true_ate, double est_ate) { return (est_ate - true_ate) * (est_ate - true_ate); }

double normalized_pehe(const Vector& true_cate, const Vector& est_cate) {
  const double p = pehe(true_cate, est_cate);
  const double var = (true_cate.array() - true_cate.mean()).square().mean();
  require(var > 0.0, "normalized pehe: true cate is constant");
  return p / var;
}

namespace {

auto cell_key(const CellResult& c) { return std::tie(c.sim, c.split, c.scenario, c.learner, c.metric); }

}  // namespace

void sort_cells(std::vector<CellResult>& cells) {
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) { return cell_key(a) < cell_key(b); });
}

std::vector<AggregateRow> aggregate(std::vector<CellResult> cells) {
  std::sort(cells.begin(), cells.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.scenario, a.learner, a.metric, a.sim, a.split) <
           std::tie(b.scenario, b.learner, b.metric, b.sim, b.split);
  });
  std::vector<AggregateRow> out;
  std::size_t i = 0;
  while (i < cells.size()) {
    std::size_t j = i;
    double s = 0.0;
    while (j < cells.size() && cells[j].scenario == cells[i].scenario && cells[j].learner == cells[i].learner &&
           cells[j].metric == cells[i].metric)
      s += cells[j++].value;
    const auto n = static_cast<double>(j - i);
    const double mean = s / n;
    double ss = 0.0;
    for (std::size_t k = i; k < j; ++k) ss += (cells[k].value - mean) * (cells[k].value - mean);
    out.push_back({cells[i].scenario, cells[i].learner, cells[i].metric, mean, std::sqrt(ss / n), j - i});
    i = j;
  }
  return out;
}

}  // namespace mcm
