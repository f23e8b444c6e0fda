#pragma once

#include "masked_matrix.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace mcm {

// Mean squared difference, no square root.
double pehe(const Vector& true_cate, const Vector& est_cate);
// pehe over rows with w == arm; throws when the arm is empty.
double pehe_by_arm(const Vector& true_cate, const Vector& est_cate, const std::vector<int>& w, int arm);
double ate_sq_err(double true_ate, double est_ate);
// pehe / population variance of the true cate. Not part of the default table.
double normalized_pehe(const Vector& true_cate, const Vector& est_cate);

// Metric names as they appear in result files.
inline constexpr const char* kMetricAte = "ate_mse";
inline constexpr const char* kMetricPehe = "pehe";
inline constexpr const char* kMetricPeheW0 = "pehe_w0";
inline constexpr const char* kMetricPeheW1 = "pehe_w1";
inline constexpr const char* kMetricNPehe = "npehe";

// One metric value of one grid cell. A cell of the grid yields one record per
// metric.
struct CellResult {
  std::size_t sim = 0;
  std::size_t split = 0;
  std::string scenario;
  std::string learner;
  std::string metric;
  double value = 0.0;
};

struct AggregateRow {
  std::string scenario;
  std::string learner;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // population std (divide by count)
  std::size_t count = 0;
};

// Groups by (scenario, learner, metric), sorted lexicographically. Values are
// summed in (sim, split) order so the result does not depend on input order.
std::vector<AggregateRow> aggregate(std::vector<CellResult> cells);

// Canonical cell order: (sim, split, scenario, learner, metric).
void sort_cells(std::vector<CellResult>& cells);

}  // namespace mcm
