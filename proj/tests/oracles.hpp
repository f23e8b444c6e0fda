#pragma once
// Independent reference implementations used only by tests. None of these
// share code with the library beyond its plain data types.

#include "masked_matrix.hpp"
#include "mgraph.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

// d-separation by enumerating every simple path of the skeleton.
inline bool d_separated(const mcm::MGraph& g, const mcm::CiQuery& q) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> edge(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : g.edges()) edge[a][b] = true;

  // desc[v] includes v itself
  std::vector<std::set<std::size_t>> desc(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      if (!desc[v].insert(u).second) continue;
      for (std::size_t c = 0; c < n; ++c)
        if (edge[u][c]) stack.push_back(c);
    }
  }
  const std::set<std::size_t> given(q.given.begin(), q.given.end());
  auto opens_collider = [&](std::size_t v) {
    return std::any_of(desc[v].begin(), desc[v].end(), [&](std::size_t u) { return given.count(u) > 0; });
  };
  auto path_active = [&](const std::vector<std::size_t>& p) {
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      const bool collider = edge[p[k - 1]][p[k]] && edge[p[k + 1]][p[k]];
      if (collider ? !opens_collider(p[k]) : given.count(p[k]) > 0) return false;
    }
    return true;
  };

  const std::set<std::size_t> targets(q.right.begin(), q.right.end());
  bool active = false;
  std::vector<std::size_t> path;
  std::vector<bool> on_path(n, false);
  auto dfs = [&](auto&& self, std::size_t u) -> void {
    if (active) return;
    if (targets.count(u) && path.size() > 1) {
      if (path_active(path)) active = true;
      return;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (on_path[v] || !(edge[u][v] || edge[v][u])) continue;
      on_path[v] = true;
      path.push_back(v);
      self(self, v);
      path.pop_back();
      on_path[v] = false;
    }
  };
  for (std::size_t s : q.left) {
    path = {s};
    on_path.assign(n, false);
    on_path[s] = true;
    dfs(dfs, s);
    if (active) return false;
  }
  return true;
}

// Random DAG over the first k roles: random order, then each forward pair
// gets an edge with probability p, capped at max_edges.
inline mcm::MGraph random_dag(mcm::Rng& rng, std::size_t k, double p, std::size_t max_edges) {
  std::vector<mcm::NodeRole> roles(std::begin(mcm::kAllRoles), std::begin(mcm::kAllRoles) + k);
  std::vector<mcm::NodeRole> order = roles;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::pair<mcm::NodeRole, mcm::NodeRole>> edges;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (edges.size() < max_edges && rng.bernoulli(p)) edges.emplace_back(order[i], order[j]);
  return mcm::MGraph(roles, edges);
}

// Random query with disjoint non-empty left/right and a possibly empty given.
inline mcm::CiQuery random_query(mcm::Rng& rng, std::size_t n) {
  mcm::CiQuery q;
  std::vector<int> slot(n);
  for (;;) {
    q = {};
    for (std::size_t v = 0; v < n; ++v) {
      slot[v] = static_cast<int>(rng.below(4));  // 0 left, 1 right, 2 given, 3 none
      if (slot[v] == 0) q.left.push_back(v);
      if (slot[v] == 1) q.right.push_back(v);
      if (slot[v] == 2) q.given.push_back(v);
    }
    if (!q.left.empty() && !q.right.empty()) return q;
  }
}

// Phi^{-1} by bisection on Phi(x) = erfc(-x / sqrt 2) / 2.
inline double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Ridge with unpenalized intercept by plain gradient descent. Returns
// (coef..., intercept).
inline mcm::Vector ridge_gd(const mcm::Matrix& x, const mcm::Vector& y, double lambda, int iters = 200000) {
  const auto n = x.rows(), d = x.cols();
  mcm::Matrix xa(n, d + 1);
  xa << x, mcm::Vector::Ones(n);
  mcm::Vector pen = mcm::Vector::Constant(d + 1, lambda);
  pen(d) = 0.0;
  // Lipschitz constant of the gradient: 2 (sigma_max(X)^2 + lambda)
  Eigen::SelfAdjointEigenSolver<mcm::Matrix> es(xa.transpose() * xa);
  const double step = 1.0 / (2.0 * (es.eigenvalues().maxCoeff() + lambda));
  mcm::Vector b = mcm::Vector::Zero(d + 1);
  for (int it = 0; it < iters; ++it) {
    const mcm::Vector grad = -2.0 * xa.transpose() * (y - xa * b) + 2.0 * pen.cwiseProduct(b);
    if (grad.norm() < 1e-12) break;
    b -= step * grad;
  }
  return b;
}

// Gradient of ||y - X b - c||^2 + lambda ||b||^2.
inline mcm::Vector ridge_gradient(const mcm::Matrix& x, const mcm::Vector& y, double lambda, const mcm::Vector& coef,
                                  double intercept) {
  const mcm::Vector r = y - x * coef - mcm::Vector::Constant(x.rows(), intercept);
  mcm::Vector g(x.cols() + 1);
  g.head(x.cols()) = -2.0 * x.transpose() * r + 2.0 * lambda * coef;
  g(x.cols()) = -2.0 * r.sum();
  return g;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  bool missing_left = false;
  double sse = std::numeric_limits<double>::infinity();
};

// Best single split by squared error: every feature, every midpoint between
// consecutive distinct observed values, absent rows sent either way, plus
// the observed-versus-absent split (threshold +inf). Each child must hold at
// least min_leaf rows.
inline Split best_split(const mcm::MaskedMatrix& x, const mcm::Vector& y, std::size_t min_leaf) {
  auto sse_of = [&](const std::vector<Eigen::Index>& rows) {
    if (rows.empty()) return 0.0;
    double m = 0;
    for (auto r : rows) m += y(r);
    m /= static_cast<double>(rows.size());
    double s = 0;
    for (auto r : rows) s += (y(r) - m) * (y(r) - m);
    return s;
  };
  Split best;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> vals;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (x.observed(i, j)) vals.push_back(x.value(i, j));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> cuts;
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) cuts.push_back(0.5 * (vals[k] + vals[k + 1]));
    cuts.push_back(std::numeric_limits<double>::infinity());
    for (double t : cuts) {
      for (bool ml : {false, true}) {
        std::vector<Eigen::Index> l, r;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const bool left = x.observed(i, j) ? x.value(i, j) <= t : ml;
          (left ? l : r).push_back(i);
        }
        if (l.size() < min_leaf || r.size() < min_leaf) continue;
        const double s = sse_of(l) + sse_of(r);
        if (s < best.sse) best = {static_cast<int>(j), t, ml, s};
      }
    }
  }
  return best;
}

// Area under the ROC curve by pairwise comparison (ties count one half).
inline double auc(const std::vector<double>& score, const std::vector<int>& label) {
  double num = 0, pairs = 0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    if (!label[i]) continue;
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (label[j]) continue;
      pairs += 1;
      num += score[i] > score[j] ? 1.0 : score[i] == score[j] ? 0.5 : 0.0;
    }
  }
  return num / pairs;
}

// Same value via ranks, O(n log n); used for large n.
inline double auc_ranked(const std::vector<double>& score, const std::vector<int>& label) {
  std::vector<std::size_t> idx(score.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return score[a] < score[b]; });
  double rank_sum = 0, pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && score[idx[j]] == score[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (label[idx[k]]) rank_sum += avg, pos += 1;
    i = j;
  }
  const double neg = static_cast<double>(score.size()) - pos;
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

}  // namespace oracle
