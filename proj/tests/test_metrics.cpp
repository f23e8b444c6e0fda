#include "error.hpp"
#include "metrics.hpp"
#include "rng.hpp"

#include <doctest.h>

#include <algorithm>

using namespace mcm;

TEST_CASE("pehe decomposes over the treatment arms") {
  Rng rng(1);
  Vector t(101), e(101);
  std::vector<int> w(101);
  for (int i = 0; i < 101; ++i) {
    t(i) = rng.normal();
    e(i) = rng.normal();
    w[i] = rng.bernoulli(0.3);
  }
  const double n1 = static_cast<double>(std::count(w.begin(), w.end(), 1));
  const double n0 = 101 - n1;
  CHECK(pehe(t, e) == doctest::Approx((n0 * pehe_by_arm(t, e, w, 0) + n1 * pehe_by_arm(t, e, w, 1)) / 101).epsilon(1e-12));
}

TEST_CASE("metrics are non-negative and vanish on agreement") {
  Vector t(3);
  t << 1, 2, 3;
  CHECK(pehe(t, t) == 0.0);
  CHECK(ate_sq_err(1.5, 1.5) == 0.0);
  CHECK(ate_sq_err(1.0, 3.0) == 4.0);
  Vector e = t;
  e(0) += 1;
  CHECK(pehe(t, e) == doctest::Approx(1.0 / 3));
  CHECK(normalized_pehe(t, e) == doctest::Approx((1.0 / 3) / (2.0 / 3)));
  CHECK_THROWS_AS(pehe_by_arm(t, e, {0, 0, 0}, 1), Error);
}

TEST_CASE("aggregation uses population std and ignores arrival order") {
  std::vector<CellResult> cells;
  for (std::size_t s = 0; s < 4; ++s) cells.push_back({s, 0, "all", "t", "pehe", static_cast<double>(s)});
  cells.push_back({0, 0, "all", "dr", "pehe", 7.0});
  auto rows = aggregate(cells);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].learner == "dr");
  CHECK(rows[1].mean == doctest::Approx(1.5));
  CHECK(rows[1].std == doctest::Approx(std::sqrt(1.25)));
  CHECK(rows[1].count == 4);

  Rng rng(2);
  for (int k = 0; k < 10; ++k) {
    for (std::size_t i = cells.size(); i > 1; --i) std::swap(cells[i - 1], cells[rng.below(i)]);
    const auto again = aggregate(cells);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      CHECK(again[r].mean == rows[r].mean);
      CHECK(again[r].std == rows[r].std);
    }
  }
}
