#include "config.hpp"
#include "error.hpp"
#include "runner.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

using namespace mcm;

namespace {

SweepConfig tiny() {
  SweepConfig c = smoke_defaults();
  c.inner.dgp.n = 400;
  c.inner.n_sims = 2;
  c.inner.n_splits = 2;
  c.inner.base.gbt.n_trees = 20;
  return c;
}

std::string cells_text(const ExperimentResult& r) {
  std::ostringstream s;
  write_cells_csv(s, r.cells);
  return s.str();
}

}  // namespace

TEST_CASE("config round trip") {
  SweepConfig c = paper_defaults();
  apply_setting(c, "learners", "x,t");
  apply_setting(c, "gbt.max_depth", "6");
  apply_setting(c, "mice.stochastic", "true");
  apply_setting(c, "z_in_scale", "column");
  apply_setting(c, "sweep.rates", "0.2,0.4");
  std::stringstream s;
  write_config(s, c);
  SweepConfig back = smoke_defaults();
  read_config(s, back);
  std::stringstream s2;
  write_config(s2, back);
  CHECK(s.str() == s2.str());
  CHECK(back.inner.learners == std::vector<LearnerKind>{LearnerKind::X, LearnerKind::T});
  CHECK(back.inner.base.gbt.max_depth == 6);
}

TEST_CASE("config rejects bad input") {
  SweepConfig c = paper_defaults();
  CHECK_THROWS_AS(apply_setting(c, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_setting(c, "n", "many"), Error);
  CHECK_THROWS_AS(apply_setting(c, "scopes", "all,bogus"), Error);
  std::istringstream missing_eq("n 10\n");
  CHECK_THROWS_AS(read_config(missing_eq, c), Error);
  c = paper_defaults();
  c.inner.test_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = paper_defaults();
  c.rates = {0.3, 0.2};
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("paper defaults") {
  const auto c = paper_defaults().inner;
  CHECK(c.dgp.n == 10000);
  CHECK(c.dgp.d == 20);
  CHECK(c.dgp.z_dim == 10);
  CHECK(c.dgp.missingness_rate == 0.3);
  CHECK(c.n_sims == 10);
  CHECK(c.n_splits == 10);
}

TEST_CASE("splits are seeded, disjoint and sized") {
  const auto a = make_split(100, 0.2, 5);
  CHECK(a.test.size() == 20);
  CHECK(a.train.size() == 80);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 100);
  CHECK(std::is_sorted(a.test.begin(), a.test.end()));
  CHECK(make_split(100, 0.2, 5).test == a.test);
  CHECK(make_split(100, 0.2, 6).test != a.test);
}

TEST_CASE("cell seeds depend on every coordinate") {
  std::set<std::uint64_t> seen;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t d = 0; d < 3; ++d) seen.insert(derive_cell_seed(1, a, b, c, d));
  CHECK(seen.size() == 108);
  CHECK(derive_dataset_seed(1, 0) != derive_dataset_seed(2, 0));
}

TEST_CASE("grid is complete and independent of worker count") {
  const SweepConfig c = tiny();
  const auto one = run_experiment(c.inner, {1, {}});
  const auto three = run_experiment(c.inner, {3, {}});
  CHECK(one.failures.empty());
  CHECK(one.grid_cells == 2 * 2 * 4 * 3);
  CHECK(one.cells.size() == one.grid_cells * 4);
  CHECK(cells_text(one) == cells_text(three));
  for (const auto& cell : one.cells) {
    CHECK(cell.value >= 0.0);
    CHECK(std::isfinite(cell.value));
  }
  for (const auto& row : one.aggregates) CHECK(row.count == 4);
}

TEST_CASE("degenerate splits are recorded as failures") {
  SweepConfig c = tiny();
  c.inner.dgp.n = 4;
  c.inner.test_fraction = 0.5;
  c.inner.n_sims = 1;
  c.inner.n_splits = 10;
  c.inner.base.kind = BaseKind::Ridge;
  const auto r = run_experiment(c.inner, {1, {}});
  using Key = std::tuple<std::size_t, std::size_t, std::string, std::string>;
  std::set<Key> failed;
  for (const auto& f : r.failures) failed.insert({f.sim, f.split, f.scenario, f.learner});
  CHECK_FALSE(r.failures.empty());
  // every cell either produced its four metrics or a failure record, never both
  CHECK(r.cells.size() + 4 * r.failures.size() == r.grid_cells * 4);
  for (const auto& cell : r.cells) CHECK(failed.count({cell.sim, cell.split, cell.scenario, cell.learner}) == 0);
  for (const auto& row : r.aggregates) CHECK(row.count <= 10);
}

TEST_CASE("worker count from the environment") {
  setenv("MCM_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  setenv("MCM_WORKERS", "junk", 1);
  CHECK(default_workers() >= 1);
  unsetenv("MCM_WORKERS");
  CHECK(default_workers() >= 1);
}

TEST_CASE("results are written to disk") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mcm_runner_test";
  fs::remove_all(dir);
  SweepConfig c = tiny();
  c.inner.n_sims = 1;
  c.inner.n_splits = 1;
  c.inner.learners = {LearnerKind::T};
  save_experiment(run_experiment(c.inner, {1, {}}), c, dir.string());
  for (const char* f : {"cells.csv", "aggregate.csv", "failures.csv", "config.cfg"}) CHECK(fs::exists(dir / f));
  CHECK_NOTHROW(load_config((dir / "config.cfg").string()));

  c.rates = {0.2, 0.4};
  const auto sw = run_sweep(c, {1, {}});
  CHECK(sw.rows.size() == 2 * 4 * 4);
  save_sweep(sw, c, dir.string());
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "sweep_plot.dat"));

  const auto summary = export_candidates(CandidateKind::CIO, (dir / "cio").string());
  CHECK(summary.graphs == 21);
  CHECK(summary.valid == 0);
  fs::remove_all(dir);
}
