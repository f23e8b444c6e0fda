#pragma once

#include "linear.hpp"
#include "masked_matrix.hpp"
#include "rng.hpp"

#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace mcm {

// Which column block gets imputed. The Z_out block is [0, z_dim), the Z_in
// block is [z_dim, d).
enum class ImputationScope { All, Nothing, Selective, SelectiveComplement };

inline constexpr ImputationScope kAllScopes[] = {ImputationScope::All, ImputationScope::Nothing,
                                                 ImputationScope::Selective, ImputationScope::SelectiveComplement};

// "all", "nothing", "selective", "complement"
std::string_view scope_name(ImputationScope s);
std::optional<ImputationScope> parse_scope(std::string_view s);

std::vector<std::size_t> scope_columns(ImputationScope scope, std::size_t z_dim, std::size_t d);

enum class ImputeMethod { Mice, Mean };
std::string_view method_name(ImputeMethod m);
std::optional<ImputeMethod> parse_method(std::string_view s);

struct MiceConfig {
  int sweeps = 10;
  double ridge_lambda = 1e-3;
  bool stochastic = false;  // add N(0, residual variance) noise to imputed cells
  double tol = 1e-6;        // stop once no imputed cell moves by more than tol

  void validate() const;
};

// Imputer fitted on one matrix and replayable on others with the same columns.
// Mean imputation stores column means; MICE additionally stores every sweep's
// per-column regression so new rows go through the same chain.
class ImputerModel {
 public:
  // Fills the target columns of x; other columns keep their absent cells.
  MaskedMatrix transform(const MaskedMatrix& x, Rng& rng) const;

  const std::vector<std::size_t>& columns() const { return columns_; }
  // Target columns that had no observed cell and were filled with 0.
  const std::vector<std::size_t>& fallback_columns() const { return fallback_; }
  std::size_t sweeps_run() const { return sweeps_.size(); }
  // Sum over target columns of the observed-row residual sum of squares, one
  // entry per sweep (MICE only).
  const std::vector<double>& objective_trace() const { return objective_; }

 private:
  friend ImputerModel fit_imputer(ImputeMethod, const MaskedMatrix&, const std::vector<std::size_t>&,
                                  const MiceConfig&, Rng&, MaskedMatrix*);
  struct Step {
    std::size_t target;
    LinearModel model;  // over all columns except target, in ascending order
    double residual_sd = 0.0;
  };
  std::vector<std::size_t> columns_;
  std::vector<std::size_t> fallback_;
  Vector means_;  // per column, observed mean (0 when never observed)
  std::vector<std::vector<Step>> sweeps_;
  bool stochastic_ = false;
  std::vector<double> objective_;
};

// Fits on x. When fitted_out is given it receives x with the target columns
// filled, exactly as produced during fitting.
ImputerModel fit_imputer(ImputeMethod method, const MaskedMatrix& x, const std::vector<std::size_t>& columns,
                         const MiceConfig& cfg, Rng& rng, MaskedMatrix* fitted_out = nullptr);

struct ImputeResult {
  MaskedMatrix x;
  std::vector<std::size_t> fallback_columns;  // non-empty means a warning
};

ImputeResult mean_impute(const MaskedMatrix& x, const std::vector<std::size_t>& columns);
ImputeResult mice_impute(const MaskedMatrix& x, const std::vector<std::size_t>& columns, const MiceConfig& cfg,
                         Rng& rng);

enum class Provenance { Original, Imputed, Indicator };

struct DesignMatrix {
  Matrix values;
  std::map<std::size_t, std::size_t> indicator_columns;  // original column -> indicator column
  std::vector<Provenance> column_provenance;
};

// Fixes which columns get indicators so train and test designs line up.
class Encoder {
 public:
  Encoder() = default;
  // Indicators for every column of x that has an absent cell.
  explicit Encoder(const MaskedMatrix& x, std::vector<std::size_t> imputed_columns = {});

  std::size_t width() const { return d_ + indicated_.size(); }
  // Absent cells become 0 plus a 1 in the column's indicator. Absent cells in
  // columns without an indicator are still zero-filled.
  DesignMatrix encode(const MaskedMatrix& x) const;
  Matrix encode_values(const MaskedMatrix& x) const;

 private:
  std::size_t d_ = 0;
  std::vector<std::size_t> indicated_;
  std::vector<std::size_t> imputed_;
};

inline DesignMatrix encode_for_learner(const MaskedMatrix& x) { return Encoder(x).encode(x); }

}  // namespace mcm
