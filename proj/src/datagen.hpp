#pragma once

#include "masked_matrix.hpp"
#include "rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcm {

// How the Z_in threshold is scaled. RowSlice reproduces the reference
// generator: the scalar std of the row's own slice. ColumnStd uses the
// per-column std over all rows instead.
enum class SliceScale { RowSlice, ColumnStd };

struct DgpConfig {
  std::size_t n = 10000;
  std::size_t d = 20;
  std::size_t z_dim = 10;  // width of the Z_out block, columns [0, z_dim)
  double missingness_rate = 0.3;
  std::uint64_t seed = 0;
  SliceScale z_in_scale = SliceScale::RowSlice;

  void validate() const;
};

struct OutcomeModel {
  Vector theta;     // N(0,1)/10 per covariate
  Vector theta_y0;  // 1 + theta
  Vector theta_y1;  // -1 + theta
  double noise_sd = 0.1;
};

struct SyntheticDataset {
  std::size_t z_dim = 0;
  Matrix x_full;        // |X|; empty when the data was loaded from disk
  MaskedMatrix x_obs;   // x_full with missing cells absent
  Mask z_out_mask;      // n x z_dim, true = observed
  Mask z_in_mask;       // n x (d - z_dim), true = observed
  std::vector<int> w;
  Vector y;
  Vector y0, y1, cate;  // noiseless potential outcomes; empty when unknown

  std::size_t n() const { return static_cast<std::size_t>(x_obs.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(x_obs.cols()); }
  bool has_truth() const { return cate.size() == static_cast<Eigen::Index>(n()); }
  double true_ate() const;

  // Throws on any broken invariant (mask/cell agreement, cate = y1 - y0, w binary).
  void validate() const;
};

// round() of the reference generator on positive arguments (half away from zero).
long round_half_away(double v);
// Standard normal quantile.
double normal_quantile(double p);

// Step 1: X ~ N(0, A A^T) with A ~ U[0,1)^{d x d}, then X /= (max X - min X).
Matrix generate_covariates(std::size_t d, std::size_t n, Rng& rng);

// Number of Z_out cells dropped per row: max(round(rate * z_dim), 1).
std::size_t z_out_missing_per_row(double rate, std::size_t z_dim);
// Step 2: per row, the k largest entries of the first z_dim columns go missing.
Mask sample_z_out(const Matrix& x, std::size_t z_dim, double rate);

// Step 3: last column missing -> 0; else any of the first floor(z_dim/2)
// missing -> 1; else Bernoulli(0.5).
std::vector<int> assign_treatment(const Mask& z_out_mask, Rng& rng);

// clamp(round(2 * rate * m), 1, floor(m / 2)) with m = d - z_dim.
std::size_t z_in_dim_count(double rate, std::size_t m);
// Step 4: treatment-dependent missingness in the Z_in block.
Mask sample_z_in(const Matrix& x, const std::vector<int>& w, double rate, std::size_t z_dim,
                 SliceScale scale = SliceScale::RowSlice);

OutcomeModel draw_outcome_model(std::size_t d, Rng& rng);

struct Outcomes {
  Vector y0, y1, y, cate;
  OutcomeModel model;
};
// Potential outcomes under a fixed model; consumes n normals for the noise.
Outcomes apply_outcome_model(const Matrix& x_full, const std::vector<int>& w, const OutcomeModel& model, Rng& rng);
// Step 5: draws the model, then applies it.
Outcomes generate_outcomes(const Matrix& x_full, const std::vector<int>& w, Rng& rng);

// Steps 2-6 on pre-nonlinearity covariates, continuing the given stream.
SyntheticDataset overlay_missingness(const Matrix& x_raw, const DgpConfig& cfg, Rng& rng);

// Full pipeline, steps 1-6.
SyntheticDataset assemble(const DgpConfig& cfg, Rng& rng);
inline SyntheticDataset generate_dataset(const DgpConfig& cfg) {
  Rng rng(cfg.seed);
  return assemble(cfg, rng);
}

// Steps 2-6 on external covariates (column order fixes the Z_out/Z_in split).
// Rejects matrices that already contain absent cells.
SyntheticDataset semi_real_overlay(const MaskedMatrix& covariates, const DgpConfig& cfg, Rng& rng);

}  // namespace mcm
