#include "gbt.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <utility>

namespace mcm {

void GbtSpec::validate() const {
  require(n_trees >= 1, "n_trees must be >= 1");
  require(max_depth >= 1, "max_depth must be >= 1");
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must lie in (0, 1]");
  require(min_leaf >= 1, "min_leaf must be >= 1");
  require(subsample > 0.0 && subsample <= 1.0, "subsample must lie in (0, 1]");
  require(max_bins >= 2 && max_bins <= 255, "max_bins must lie in [2, 255]");
}

double RegressionTree::predict_row(const MaskedMatrix& x, Eigen::Index row) const {
  int k = 0;
  while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(k)];
    bool go_left;
    if (auto v = x.at(row, nd.feature)) {
      go_left = *v <= nd.threshold;
    } else {
      go_left = nd.default_left;
    }
    k = go_left ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(k)].value;
}

Vector GbtModel::predict(const MaskedMatrix& x) const {
  Vector out = Vector::Constant(x.rows(), base_score_);
  for (const auto& t : trees_)
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) += t.predict_row(x, i);
  return out;
}

namespace {

constexpr std::uint8_t kMissingBin = 255;

// Feature-major binned copy of the training design.
struct BinnedDesign {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<std::uint8_t> codes;        // codes[f * n + i]
  std::vector<std::vector<double>> cuts;  // bin b holds values <= cuts[f][b]; last bin is open
  std::vector<int> bins;                  // number of bins per feature (0 when never observed)

  std::uint8_t code(std::size_t f, std::size_t i) const { return codes[f * n + i]; }
};

BinnedDesign bin_design(const MaskedMatrix& x, int max_bins) {
  BinnedDesign b;
  b.n = static_cast<std::size_t>(x.rows());
  b.p = static_cast<std::size_t>(x.cols());
  b.codes.assign(b.n * b.p, kMissingBin);
  b.cuts.resize(b.p);
  b.bins.assign(b.p, 0);
  std::vector<double> vals;
  for (std::size_t f = 0; f < b.p; ++f) {
    vals.clear();
    for (std::size_t i = 0; i < b.n; ++i)
      if (auto v = x.at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f))) vals.push_back(*v);
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    std::vector<double> candidates;
    std::unique_copy(vals.begin(), vals.end(), std::back_inserter(candidates));
    if (candidates.size() > static_cast<std::size_t>(max_bins)) {
      candidates.clear();
      const auto mb = static_cast<std::size_t>(max_bins);
      for (std::size_t k = 0; k < mb; ++k) {
        const std::size_t pos = std::min(vals.size() - 1, ((2 * k + 1) * vals.size()) / (2 * mb));
        if (candidates.empty() || vals[pos] != candidates.back()) candidates.push_back(vals[pos]);
      }
    }
    auto& cuts = b.cuts[f];
    for (std::size_t k = 0; k + 1 < candidates.size(); ++k) cuts.push_back(0.5 * (candidates[k] + candidates[k + 1]));
    b.bins[f] = static_cast<int>(cuts.size() + 1);
    for (std::size_t i = 0; i < b.n; ++i) {
      if (auto v = x.at(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f))) {
        const auto it = std::lower_bound(cuts.begin(), cuts.end(), *v);
        b.codes[f * b.n + i] = static_cast<std::uint8_t>(it - cuts.begin());
      }
    }
  }
  return b;
}

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  int bin = -1;  // left = bins <= bin
  bool default_left = true;
};

// Per-feature gradient histograms; bins [0, nb) plus the absent-cell bin.
struct Histogram {
  std::vector<double> sum;
  std::vector<std::uint32_t> cnt;
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedDesign& design, const std::vector<double>& residual, const GbtSpec& spec)
      : d_(design), r_(residual), spec_(spec) {}

  // Grows one tree on rows and adds each leaf's output to pred for the rows
  // that reach it.
  RegressionTree build(std::vector<std::uint32_t>& rows, std::vector<double>& pred) {
    tree_ = RegressionTree{};
    pred_ = &pred;
    Histogram* h = nullptr;
    if (may_split(rows.size(), 0)) {
      h = acquire();
      fill(*h, rows, 0, rows.size());
    }
    grow(rows, 0, rows.size(), 0, h);
    return std::move(tree_);
  }

 private:
  bool may_split(std::size_t count, int depth) const {
    return depth < spec_.max_depth && count >= 2 * static_cast<std::size_t>(spec_.min_leaf);
  }

  Histogram* acquire() {
    if (free_.empty()) {
      pool_.push_back(std::make_unique<Histogram>());
      pool_.back()->sum.assign(d_.p * 256, 0.0);
      pool_.back()->cnt.assign(d_.p * 256, 0u);
      return pool_.back().get();
    }
    Histogram* h = free_.back();
    free_.pop_back();
    return h;
  }
  void release(Histogram* h) {
    if (h) free_.push_back(h);
  }

  void clear(Histogram& h) const {
    for (std::size_t f = 0; f < d_.p; ++f) {
      const std::size_t o = f * 256;
      std::fill_n(h.sum.begin() + static_cast<std::ptrdiff_t>(o), d_.bins[f], 0.0);
      std::fill_n(h.cnt.begin() + static_cast<std::ptrdiff_t>(o), d_.bins[f], 0u);
      h.sum[o + kMissingBin] = 0.0;
      h.cnt[o + kMissingBin] = 0u;
    }
  }

  void fill(Histogram& h, const std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end) const {
    clear(h);
    for (std::size_t f = 0; f < d_.p; ++f) {
      if (d_.bins[f] == 0) continue;
      const std::uint8_t* col = d_.codes.data() + f * d_.n;
      double* hs = h.sum.data() + f * 256;
      std::uint32_t* hc = h.cnt.data() + f * 256;
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t i = rows[k];
        hs[col[i]] += r_[i];
        ++hc[col[i]];
      }
    }
  }

  // big -= small, bin by bin.
  void subtract(Histogram& big, const Histogram& small) const {
    for (std::size_t f = 0; f < d_.p; ++f) {
      const std::size_t o = f * 256;
      for (std::size_t b = 0; b < static_cast<std::size_t>(d_.bins[f]); ++b) {
        big.sum[o + b] -= small.sum[o + b];
        big.cnt[o + b] -= small.cnt[o + b];
      }
      big.sum[o + kMissingBin] -= small.sum[o + kMissingBin];
      big.cnt[o + kMissingBin] -= small.cnt[o + kMissingBin];
    }
  }

  // hist is this node's histogram when the node may split, else null. The
  // node takes ownership of it.
  int grow(std::vector<std::uint32_t>& rows, std::size_t begin, std::size_t end, int depth, Histogram* hist) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double s = 0.0;
    for (std::size_t k = begin; k < end; ++k) s += r_[rows[k]];
    const auto count = static_cast<double>(end - begin);

    SplitChoice best;
    if (hist) best = find_split(*hist, end - begin, s);
    if (best.feature < 0) {
      release(hist);
      const double leaf = count > 0 ? spec_.learning_rate * s / count : 0.0;
      tree_.nodes[static_cast<std::size_t>(id)].value = leaf;
      for (std::size_t k = begin; k < end; ++k) (*pred_)[rows[k]] += leaf;
      return id;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    auto goes_left = [&](std::uint32_t i) {
      const std::uint8_t c = d_.code(f, i);
      return c == kMissingBin ? best.default_left : c <= best.bin;
    };
    const auto mid = static_cast<std::size_t>(
        std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(end), goes_left) -
        rows.begin());

    {
      TreeNode& nd = tree_.nodes[static_cast<std::size_t>(id)];
      nd.feature = best.feature;
      nd.default_left = best.default_left;
      const auto& cuts = d_.cuts[f];
      nd.threshold = best.bin < static_cast<int>(cuts.size()) ? cuts[static_cast<std::size_t>(best.bin)]
                                                              : std::numeric_limits<double>::infinity();
    }

    // Histogram of the smaller child is built from its rows; the larger one
    // is the parent's minus the smaller.
    Histogram* hl = nullptr;
    Histogram* hr = nullptr;
    const bool split_l = may_split(mid - begin, depth + 1);
    const bool split_r = may_split(end - mid, depth + 1);
    if (split_l || split_r) {
      const bool left_small = mid - begin <= end - mid;
      Histogram* small = acquire();
      if (left_small) fill(*small, rows, begin, mid);
      else fill(*small, rows, mid, end);
      subtract(*hist, *small);
      hl = left_small ? small : hist;
      hr = left_small ? hist : small;
      if (!split_l) release(std::exchange(hl, nullptr));
      if (!split_r) release(std::exchange(hr, nullptr));
    } else {
      release(hist);
    }
    const int l = grow(rows, begin, mid, depth + 1, hl);
    const int r = grow(rows, mid, end, depth + 1, hr);
    tree_.nodes[static_cast<std::size_t>(id)].left = l;
    tree_.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  SplitChoice find_split(const Histogram& h, std::size_t node_rows, double total) const {
    const double n = static_cast<double>(node_rows);
    const double parent = total * total / n;
    const auto min_leaf = static_cast<std::uint32_t>(spec_.min_leaf);
    const auto node_n = static_cast<std::uint32_t>(node_rows);
    SplitChoice best;
    for (std::size_t f = 0; f < d_.p; ++f) {
      const int nb = d_.bins[f];
      if (nb == 0) continue;
      const double* hs = h.sum.data() + f * 256;
      const std::uint32_t* hc = h.cnt.data() + f * 256;
      const double miss_s = hs[kMissingBin];
      const std::uint32_t miss_n = hc[kMissingBin];
      const std::uint32_t obs_n = node_n - miss_n;
      double sl = 0.0;
      std::uint32_t nl = 0;
      for (int b = 0; b < nb; ++b) {
        if (hc[b] == 0) continue;  // same partition as the previous bin
        sl += hs[b];
        nl += hc[b];
        if (nl == obs_n && miss_n == 0) break;
        // absent cells on the right
        {
          const std::uint32_t nr = node_n - nl;
          if (nl >= min_leaf && nr >= min_leaf) {
            const double sr = total - sl;
            const double g = sl * sl / nl + sr * sr / nr - parent;
            if (g > best.gain + 1e-12) {
              best = {g, static_cast<int>(f), b, false};
            }
          }
        }
        // absent cells on the left
        if (miss_n > 0 && nl < obs_n) {
          const std::uint32_t nll = nl + miss_n;
          const std::uint32_t nr = node_n - nll;
          if (nll >= min_leaf && nr >= min_leaf) {
            const double sll = sl + miss_s;
            const double sr = total - sll;
            const double g = sll * sll / nll + sr * sr / nr - parent;
            if (g > best.gain + 1e-12) best = {g, static_cast<int>(f), b, true};
          }
        }
      }
    }
    return best;
  }

  const BinnedDesign& d_;
  const std::vector<double>& r_;
  const GbtSpec& spec_;
  std::vector<std::unique_ptr<Histogram>> pool_;
  std::vector<Histogram*> free_;
  std::vector<double>* pred_ = nullptr;
  RegressionTree tree_;
};

}  // namespace

GbtModel fit_gbt(const MaskedMatrix& x, const Vector& y, const GbtSpec& spec, Rng& rng) {
  spec.validate();
  require(x.rows() == y.size(), "design/target row mismatch");
  require(x.rows() >= 1, "gbt needs at least one row");

  GbtModel model;
  const auto n = static_cast<std::size_t>(x.rows());
  model.base_score_ = y.mean();
  std::vector<double> pred(n, model.base_score_);
  std::vector<double> resid(n);
  auto sse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      resid[i] = y(static_cast<Eigen::Index>(i)) - pred[i];
      s += resid[i] * resid[i];
    }
    return s;
  };
  model.training_loss_.push_back(sse());
  if (model.training_loss_.back() == 0.0) return model;

  const BinnedDesign design = bin_design(x, spec.max_bins);
  TreeBuilder builder(design, resid, spec);
  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  const auto sample_n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.subsample * n)));

  std::vector<std::uint32_t> rows;
  std::vector<char> sampled(n, 1);
  for (int t = 0; t < spec.n_trees; ++t) {
    if (sample_n < n) {
      rows = all;
      for (std::size_t k = 0; k < sample_n; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(rows[k], rows[j]);
      }
      rows.resize(sample_n);
      std::sort(rows.begin(), rows.end());
      std::fill(sampled.begin(), sampled.end(), 0);
      for (std::uint32_t i : rows) sampled[i] = 1;
    } else {
      rows = all;
    }
    RegressionTree tree = builder.build(rows, pred);
    if (sample_n < n)
      for (std::size_t i = 0; i < n; ++i)
        if (!sampled[i]) pred[i] += tree.predict_row(x, static_cast<Eigen::Index>(i));
    model.trees_.push_back(std::move(tree));
    model.training_loss_.push_back(sse());
  }
  return model;
}

}  // namespace mcm
