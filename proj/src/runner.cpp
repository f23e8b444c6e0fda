#include "runner.hpp"

#include "error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace mcm {

namespace {

// Domain tags keep seeds of different purposes apart.
constexpr std::uint64_t kTagDataset = 0x7e1;
constexpr std::uint64_t kTagSplit = 0x7e2;
constexpr std::uint64_t kTagImpute = 0x7e3;
constexpr std::uint64_t kTagNuisance = 0x7e4;
constexpr std::uint64_t kTagCell = 0x7e5;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void run_pool(std::size_t tasks, std::size_t workers, const std::function<void(std::size_t)>& body,
              const std::function<void()>& after_each) {
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < tasks;) {
      body(t);
      after_each();
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, tasks));
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(loop);
  for (auto& th : pool) th.join();
}

Vector truth_slice(const Vector& v, const std::vector<std::size_t>& idx) { return take(v, idx); }

}  // namespace

std::uint64_t derive_cell_seed(std::uint64_t base_seed, std::size_t sim, std::size_t split, std::size_t scope,
                               std::size_t learner) {
  return combine_seed(base_seed, {kTagCell, sim, split, scope, learner});
}

std::uint64_t derive_dataset_seed(std::uint64_t base_seed, std::size_t sim) {
  return combine_seed(base_seed, {kTagDataset, sim});
}

std::size_t default_workers() {
  if (const char* env = std::getenv("MCM_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SplitIndices make_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  require(n >= 2, "split needs at least two rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  std::size_t n_test = static_cast<std::size_t>(round_half_away(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  SplitIndices s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const std::size_t workers = opts.workers ? opts.workers : default_workers();
  const std::size_t n_scopes = cfg.scopes.size();

  std::vector<SyntheticDataset> data(cfg.n_sims);
  run_pool(
      cfg.n_sims, workers,
      [&](std::size_t sim) {
        DgpConfig dc = cfg.dgp;
        dc.seed = derive_dataset_seed(cfg.base_seed, sim);
        data[sim] = generate_dataset(dc);
      },
      [] {});

  std::vector<SplitIndices> splits(cfg.n_sims * cfg.n_splits);
  for (std::size_t sim = 0; sim < cfg.n_sims; ++sim)
    for (std::size_t sp = 0; sp < cfg.n_splits; ++sp)
      splits[sim * cfg.n_splits + sp] =
          make_split(cfg.dgp.n, cfg.test_fraction, combine_seed(cfg.base_seed, {kTagSplit, sim, sp}));

  const bool needs_e = std::any_of(cfg.learners.begin(), cfg.learners.end(), [](LearnerKind k) { return k != LearnerKind::T; });
  const std::size_t tasks = cfg.n_sims * cfg.n_splits * n_scopes;
  std::vector<std::vector<CellResult>> out_cells(tasks);
  std::vector<std::vector<CellFailure>> out_fail(tasks);

  auto body = [&](std::size_t t) {
    const std::size_t sim = t / (cfg.n_splits * n_scopes);
    const std::size_t sp = (t / n_scopes) % cfg.n_splits;
    const ImputationScope scope = cfg.scopes[t % n_scopes];
    const auto scope_id = static_cast<std::size_t>(scope);
    const std::string scenario(scope_name(scope));
    const SyntheticDataset& ds = data[sim];
    const SplitIndices& si = splits[sim * cfg.n_splits + sp];

    auto record_failure = [&](const std::string& learner, const std::string& msg) {
      out_fail[t].push_back({sim, sp, scenario, learner, msg});
    };

    MaskedMatrix x_train, x_test;
    Nuisances nu;
    const auto w_train = take(std::span<const int>(ds.w), std::span<const std::size_t>(si.train));
    const auto w_test = take(std::span<const int>(ds.w), std::span<const std::size_t>(si.test));
    const Vector y_train = take(ds.y, si.train);
    const Vector y_test = take(ds.y, si.test);
    try {
      const auto cols = scope_columns(scope, ds.z_dim, ds.d());
      Rng irng(combine_seed(cfg.base_seed, {kTagImpute, sim, sp, scope_id}));
      if (cols.empty()) {
        x_train = ds.x_obs.select_rows(si.train);
        x_test = ds.x_obs.select_rows(si.test);
      } else if (cfg.impute_fit == ImputeFit::Train) {
        const ImputerModel imp = fit_imputer(cfg.imputer, ds.x_obs.select_rows(si.train), cols, cfg.mice, irng, &x_train);
        x_test = imp.transform(ds.x_obs.select_rows(si.test), irng);
      } else {
        std::vector<std::size_t> both = si.train;
        both.insert(both.end(), si.test.begin(), si.test.end());
        MaskedMatrix filled;
        fit_imputer(cfg.imputer, ds.x_obs.select_rows(both), cols, cfg.mice, irng, &filled);
        std::vector<std::size_t> a(si.train.size()), b(si.test.size());
        std::iota(a.begin(), a.end(), 0);
        std::iota(b.begin(), b.end(), si.train.size());
        x_train = filled.select_rows(a);
        x_test = filled.select_rows(b);
      }
      Rng nrng(combine_seed(cfg.base_seed, {kTagNuisance, sim, sp, scope_id}));
      nu = fit_nuisances(x_train, w_train, y_train, cfg.base, needs_e ? &cfg.propensity : nullptr, nrng);
    } catch (const std::exception& e) {
      for (LearnerKind k : cfg.learners) record_failure(std::string(learner_name(k)), e.what());
      return;
    }

    const Vector cate_test = truth_slice(ds.cate, si.test);
    const double true_ate = cate_test.mean();
    for (LearnerKind k : cfg.learners) {
      const std::string lname(learner_name(k));
      try {
        const MetaLearnerSpec spec = cfg.learner_spec(k);
        Rng lrng(derive_cell_seed(cfg.base_seed, sim, sp, scope_id, static_cast<std::size_t>(k)));
        std::shared_ptr<const CateModel> model;
        switch (k) {
          case LearnerKind::T: model = fit_t_learner(nu); break;
          case LearnerKind::DR: model = fit_dr_learner(nu, x_train, w_train, y_train, spec, lrng); break;
          case LearnerKind::X: model = fit_x_learner(nu, x_train, w_train, y_train, spec, lrng); break;
        }
        const Vector est = model->predict(x_test);
        double est_ate = est.mean();
        if (k == LearnerKind::DR && cfg.dr_ate == DrAte::Aipw)
          est_ate = aipw_pseudo_outcomes(nu, x_test, w_test, y_test).mean();
        std::vector<CellResult> rs;
        rs.push_back({sim, sp, scenario, lname, kMetricAte, ate_sq_err(true_ate, est_ate)});
        rs.push_back({sim, sp, scenario, lname, kMetricPehe, pehe(cate_test, est)});
        rs.push_back({sim, sp, scenario, lname, kMetricPeheW0, pehe_by_arm(cate_test, est, w_test, 0)});
        rs.push_back({sim, sp, scenario, lname, kMetricPeheW1, pehe_by_arm(cate_test, est, w_test, 1)});
        if (cfg.report_npehe) rs.push_back({sim, sp, scenario, lname, kMetricNPehe, normalized_pehe(cate_test, est)});
        for (const auto& r : rs)
          if (!std::isfinite(r.value)) fail(ErrorKind::InvalidArgument, "non-finite " + r.metric);
        out_cells[t].insert(out_cells[t].end(), rs.begin(), rs.end());
      } catch (const std::exception& e) {
        record_failure(lname, e.what());
      }
    }
  };

  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  run_pool(tasks, workers, body, [&] {
    const std::size_t d = ++done;
    if (opts.progress) {
      std::lock_guard lk(progress_mu);
      opts.progress(d, tasks);
    }
  });

  ExperimentResult r;
  r.grid_cells = tasks * cfg.learners.size();
  for (auto& v : out_cells) r.cells.insert(r.cells.end(), v.begin(), v.end());
  for (auto& v : out_fail) r.failures.insert(r.failures.end(), v.begin(), v.end());
  sort_cells(r.cells);
  if (!r.cells.empty()) r.aggregates = aggregate(r.cells);
  return r;
}

SweepResult run_sweep(const SweepConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  SweepResult out;
  for (double rate : cfg.rates) {
    ExperimentConfig e = cfg.inner;
    e.dgp.missingness_rate = rate;
    const ExperimentResult r = run_experiment(e, opts);
    for (const auto& a : r.aggregates) out.rows.push_back({rate, a});
    out.failures.insert(out.failures.end(), r.failures.begin(), r.failures.end());
  }
  return out;
}

void write_cells_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "sim,split,scenario,learner,metric,value\n";
  for (const auto& c : cells)
    out << c.sim << ',' << c.split << ',' << c.scenario << ',' << c.learner << ',' << c.metric << ',' << fmt(c.value)
        << '\n';
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "scenario,learner,metric,mean,std,count\n";
  for (const auto& a : rows)
    out << a.scenario << ',' << a.learner << ',' << a.metric << ',' << fmt(a.mean) << ',' << fmt(a.std) << ','
        << a.count << '\n';
}

void write_failures_csv(std::ostream& out, const std::vector<CellFailure>& failures) {
  out << "sim,split,scenario,learner,message\n";
  for (const auto& f : failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << f.sim << ',' << f.split << ',' << f.scenario << ',' << f.learner << ',' << msg << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "rate,scenario,learner,metric,mean,std\n";
  for (const auto& r : rows)
    out << fmt(r.rate) << ',' << r.row.scenario << ',' << r.row.learner << ',' << r.row.metric << ','
        << fmt(r.row.mean) << ',' << fmt(r.row.std) << '\n';
}

void write_sweep_plot_data(std::ostream& out, const std::vector<SweepRow>& rows) {
  // (learner, metric) -> rate -> scenario -> mean
  std::map<std::pair<std::string, std::string>, std::map<double, std::map<std::string, double>>> blocks;
  std::vector<std::string> scenarios;
  for (const auto& r : rows) {
    blocks[{r.row.learner, r.row.metric}][r.rate][r.row.scenario] = r.row.mean;
    if (std::find(scenarios.begin(), scenarios.end(), r.row.scenario) == scenarios.end())
      scenarios.push_back(r.row.scenario);
  }
  std::sort(scenarios.begin(), scenarios.end());
  bool first = true;
  for (const auto& [key, by_rate] : blocks) {
    if (!first) out << "\n\n";
    first = false;
    out << "# learner=" << key.first << " metric=" << key.second << "\n# rate";
    for (const auto& s : scenarios) out << ' ' << s;
    out << '\n';
    for (const auto& [rate, by_scen] : by_rate) {
      out << fmt(rate);
      for (const auto& s : scenarios) {
        const auto it = by_scen.find(s);
        out << ' ' << (it == by_scen.end() ? std::string("nan") : fmt(it->second));
      }
      out << '\n';
    }
  }
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) fail(ErrorKind::Io, "cannot write " + p.string());
  return f;
}

}  // namespace

void save_experiment(const ExperimentResult& r, const SweepConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  auto cells = open_out(d / "cells.csv");
  write_cells_csv(cells, r.cells);
  auto agg = open_out(d / "aggregate.csv");
  write_aggregate_csv(agg, r.aggregates);
  auto fails = open_out(d / "failures.csv");
  write_failures_csv(fails, r.failures);
  auto conf = open_out(d / "config.cfg");
  write_config(conf, cfg);
}

void save_sweep(const SweepResult& r, const SweepConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  auto sweep = open_out(d / "sweep.csv");
  write_sweep_csv(sweep, r.rows);
  auto plot = open_out(d / "sweep_plot.dat");
  write_sweep_plot_data(plot, r.rows);
  auto fails = open_out(d / "failures.csv");
  write_failures_csv(fails, r.failures);
  auto conf = open_out(d / "config.cfg");
  write_config(conf, cfg);
}

EnumerationSummary export_candidates(CandidateKind kind, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  const auto graphs = enumerate_candidates(kind);
  auto csv = open_out(d / "validity.csv");
  csv << "label,file,no_x_to_w,no_xt_to_y,no_z_to_y,has_x_to_y,has_xt_to_w,has_z_to_w,valid\n";
  EnumerationSummary s;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const std::string label = candidate_label(kind, i);
    const std::string file = label + ".tsv";
    auto g = open_out(d / file);
    write_edge_list(g, graphs[i], {std::string(candidate_kind_name(kind)) + " candidate " + label});
    const ValidityReport v = evaluate_validity(graphs[i]);
    auto b = [](bool x) { return x ? "1" : "0"; };
    csv << label << ',' << file << ',' << b(v.no_x_to_w) << ',' << b(v.no_xt_to_y) << ',' << b(v.no_z_to_y) << ','
        << b(v.has_x_to_y) << ',' << b(v.has_xt_to_w) << ',' << b(v.has_z_to_w) << ',' << b(v.overall_valid()) << '\n';
    ++s.graphs;
    if (v.overall_valid()) ++s.valid;
  }
  return s;
}

}  // namespace mcm
