#include "datagen.hpp"
#include "dataset_io.hpp"
#include "error.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace mcm;

namespace {

DgpConfig small(std::uint64_t seed = 3, std::size_t n = 1500) {
  DgpConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("normal quantile matches bisection") {
  for (double p : {1e-6, 0.001, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.999999})
    CHECK(normal_quantile(p) == doctest::Approx(oracle::normal_quantile(p)).epsilon(1e-10));
}

TEST_CASE("round half away from zero") {
  CHECK(round_half_away(2.5) == 3);
  CHECK(round_half_away(0.5) == 1);
  CHECK(round_half_away(2.4999) == 2);
  CHECK(round_half_away(-1.5) == -2);
}

TEST_CASE("missing-cell counts per block") {
  CHECK(z_out_missing_per_row(0.3, 10) == 3);
  CHECK(z_out_missing_per_row(0.01, 10) == 1);
  CHECK(z_in_dim_count(0.3, 10) == 5);
  CHECK(z_in_dim_count(0.1, 10) == 2);
  CHECK(z_in_dim_count(0.01, 10) == 1);
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate_dataset(small(7, 300));
  const auto b = generate_dataset(small(7, 300));
  const auto c = generate_dataset(small(8, 300));
  CHECK(a.x_obs == b.x_obs);
  CHECK(a.y == b.y);
  CHECK(a.w == b.w);
  CHECK_FALSE(a.x_obs == c.x_obs);
}

TEST_CASE("dataset invariants") {
  const auto ds = generate_dataset(small());
  CHECK_NOTHROW(ds.validate());
  const std::size_t zd = ds.z_dim;
  for (Eigen::Index i = 0; i < ds.x_obs.rows(); ++i) {
    CHECK(static_cast<std::size_t>(zd - ds.z_out_mask.row(i).count()) == 3);
    for (Eigen::Index j = 0; j < ds.x_obs.cols(); ++j) {
      const bool m = j < static_cast<Eigen::Index>(zd) ? ds.z_out_mask(i, j) : ds.z_in_mask(i, j - zd);
      REQUIRE(ds.x_obs.observed(i, j) == m);
      if (m) REQUIRE(ds.x_obs.value(i, j) == ds.x_full(i, j));
    }
  }
  CHECK((ds.cate - (ds.y1 - ds.y0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ds.x_full.array() >= 0).all());
}

TEST_CASE("treatment follows the out-block rule") {
  const auto ds = generate_dataset(small());
  const auto zd = static_cast<Eigen::Index>(ds.z_dim);
  for (Eigen::Index i = 0; i < ds.z_out_mask.rows(); ++i) {
    const int w = ds.w[static_cast<std::size_t>(i)];
    if (!ds.z_out_mask(i, zd - 1)) CHECK(w == 0);
    else if (!ds.z_out_mask.row(i).head(zd / 2).all()) CHECK(w == 1);
  }
}

TEST_CASE("in-block missingness support identifies treatment") {
  const auto ds = generate_dataset(small());
  const Eigen::Index m = ds.z_in_mask.cols(), k = static_cast<Eigen::Index>(z_in_dim_count(0.3, m));
  for (Eigen::Index i = 0; i < ds.z_in_mask.rows(); ++i) {
    const bool first = !ds.z_in_mask.row(i).head(k).all();
    const bool last = !ds.z_in_mask.row(i).tail(k).all();
    if (ds.w[static_cast<std::size_t>(i)]) CHECK_FALSE(first);
    else CHECK_FALSE(last);
  }
}

TEST_CASE("flipping treatment moves in-block missingness to the other half") {
  Rng rng(5);
  const Matrix x = generate_covariates(20, 400, rng);
  std::vector<int> w(400, 0);
  const Mask m0 = sample_z_in(x, w, 0.3, 10);
  std::fill(w.begin(), w.end(), 1);
  const Mask m1 = sample_z_in(x, w, 0.3, 10);
  CHECK(m0.leftCols(5) == m1.rightCols(5));
  CHECK(m0.rightCols(5).all());
  CHECK(m1.leftCols(5).all());
}

TEST_CASE("outcome noise is N(0, 0.1^2)") {
  const auto ds = generate_dataset(small(21, 4000));
  double s = 0, ss = 0;
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
    const double e = ds.y(i) - (ds.w[static_cast<std::size_t>(i)] ? ds.y1(i) : ds.y0(i));
    s += e;
    ss += e * e;
  }
  const double n = static_cast<double>(ds.y.size());
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::sqrt(ss / n) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("column-std scaling also keeps supports disjoint") {
  auto cfg = small(4, 800);
  cfg.z_in_scale = SliceScale::ColumnStd;
  const auto ds = generate_dataset(cfg);
  CHECK_NOTHROW(ds.validate());
  CHECK(ds.x_obs.absent_count() > 0);
}

TEST_CASE("semi-real overlay") {
  Rng rng(9);
  const Matrix x = generate_covariates(12, 300, rng);
  DgpConfig cfg = small(1, 300);
  cfg.d = 12;
  cfg.z_dim = 6;
  const auto ds = semi_real_overlay(MaskedMatrix(x), cfg, rng);
  CHECK(ds.d() == 12);
  CHECK_NOTHROW(ds.validate());
  MaskedMatrix holes(x);
  holes.clear(0, 0);
  CHECK_THROWS_AS(semi_real_overlay(holes, cfg, rng), Error);
}

TEST_CASE("config validation") {
  DgpConfig c;
  c.z_dim = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.z_dim = 20;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.missingness_rate = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("CSV round trip is exact") {
  const auto ds = generate_dataset(small(2, 200));
  std::stringstream s;
  write_dataset_csv(s, ds);
  const auto back = read_dataset_csv(s, ds.z_dim);
  CHECK(back.x_obs == ds.x_obs);
  CHECK(back.y == ds.y);
  CHECK(back.w == ds.w);
  CHECK(back.cate == ds.cate);
  CHECK(back.z_in_mask == ds.z_in_mask);

  std::stringstream m;
  write_meta(m, meta_for(small(2, 200)));
  const DatasetMeta meta = read_meta(m);
  CHECK(meta.z_dim == 10);
  CHECK(meta.seed == 2);
  CHECK(meta.generator == Rng::kName);
}

TEST_CASE("CSV parse errors") {
  std::istringstream bad("x0,x1,w,y\n1,2,3,4\n");
  CHECK_THROWS_AS(read_dataset_csv(bad, 1), Error);
  std::istringstream ragged("x0,x1,w,y\n1,2,0\n");
  CHECK_THROWS_AS(read_dataset_csv(ragged, 1), Error);
  std::istringstream junk("x0,x1,w,y\n1,abc,0,1\n");
  CHECK_THROWS_AS(read_dataset_csv(junk, 1), Error);
}
