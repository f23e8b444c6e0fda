#pragma once

#include "masked_matrix.hpp"
#include "rng.hpp"

#include <cstdint>
#include <vector>

namespace mcm {

struct GbtSpec {
  int n_trees = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_leaf = 10;
  double subsample = 1.0;
  // Upper bound on split candidates per feature. Features with fewer distinct
  // observed values are split exactly between consecutive values.
  int max_bins = 255;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // observed value <= threshold goes left
  bool default_left = true;  // route for absent cells
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output, learning rate already applied
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_row(const MaskedMatrix& x, Eigen::Index row) const;
};

// Squared-loss gradient boosting. Absent cells are routed at each split to
// the side that gave the lower training SSE; when a split saw no absent rows
// during training, they go right (the "greater than threshold" side), as in
// XGBoost.
class GbtModel {
 public:
  double base_score() const { return base_score_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  // Training SSE after the base score (index 0) and after each tree.
  const std::vector<double>& training_loss() const { return training_loss_; }

  Vector predict(const MaskedMatrix& x) const;

 private:
  friend GbtModel fit_gbt(const MaskedMatrix&, const Vector&, const GbtSpec&, Rng&);
  double base_score_ = 0.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> training_loss_;
};

GbtModel fit_gbt(const MaskedMatrix& x, const Vector& y, const GbtSpec& spec, Rng& rng);

}  // namespace mcm
