#include "mcm/mcm.h"

#include "config.hpp"
#include "dataset_io.hpp"
#include "error.hpp"
#include "impute.hpp"
#include "mgraph.hpp"
#include "runner.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <variant>

struct mcm_graph {
  mcm::MGraph g;
};
struct mcm_dataset {
  mcm::SyntheticDataset ds;
  mcm::DatasetMeta meta;
};
struct mcm_config {
  mcm::SweepConfig cfg;
};
struct mcm_results {
  mcm::SweepConfig cfg;
  std::variant<mcm::ExperimentResult, mcm::SweepResult> r;
  std::vector<mcm::SweepRow> rows;  // flattened view for row access
};

namespace {

thread_local std::string g_last_error;

mcm_status status_of(mcm::ErrorKind k) {
  switch (k) {
    case mcm::ErrorKind::InvalidArgument: return MCM_ERR_INVALID_ARGUMENT;
    case mcm::ErrorKind::Query: return MCM_ERR_QUERY;
    case mcm::ErrorKind::Parse: return MCM_ERR_PARSE;
    case mcm::ErrorKind::Overlap: return MCM_ERR_OVERLAP;
    case mcm::ErrorKind::Io: return MCM_ERR_IO;
  }
  return MCM_ERR_INTERNAL;
}

template <class F>
mcm_status guarded(F&& f) {
  try {
    f();
    return MCM_OK;
  } catch (const mcm::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MCM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MCM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) mcm::fail(mcm::ErrorKind::InvalidArgument, std::string(what) + " must not be null");
}

std::vector<mcm::NodeRole> parse_roles(const mcm::MGraph& g, const char* list) {
  std::vector<mcm::NodeRole> out;
  if (!list) return out;
  std::string s(list);
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) {
      auto r = mcm::parse_role(item);
      if (!r) mcm::fail(mcm::ErrorKind::Query, "unknown node '" + item + "'");
      g.id_of(*r);  // throws when the role is not in this graph
      out.push_back(*r);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

mcm::NodeRole parse_one_role(const char* s) {
  need(s, "node name");
  auto r = mcm::parse_role(s);
  if (!r) mcm::fail(mcm::ErrorKind::Query, std::string("unknown node '") + s + "'");
  return *r;
}

mcm::RunOptions options(size_t workers, mcm_progress_fn progress, void* user) {
  mcm::RunOptions o;
  o.workers = workers;
  if (progress) o.progress = [progress, user](std::size_t d, std::size_t t) { progress(d, t, user); };
  return o;
}

}  // namespace

extern "C" {

const char* mcm_last_error(void) { return g_last_error.c_str(); }

const char* mcm_version(void) { return "1.0.0"; }

const char* mcm_status_name(mcm_status s) {
  switch (s) {
    case MCM_OK: return "ok";
    case MCM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MCM_ERR_QUERY: return "query error";
    case MCM_ERR_PARSE: return "parse error";
    case MCM_ERR_OVERLAP: return "overlap error";
    case MCM_ERR_IO: return "i/o error";
    case MCM_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

mcm_status mcm_graph_builtin(const char* name, mcm_graph** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    auto k = mcm::parse_builtin(name);
    if (!k) mcm::fail(mcm::ErrorKind::InvalidArgument, std::string("unknown built-in graph '") + name + "'");
    *out = new mcm_graph{mcm::build_graph(*k)};
  });
}

mcm_status mcm_graph_load(const char* name_or_path, mcm_graph** out) {
  return guarded([&] {
    need(name_or_path, "name_or_path");
    need(out, "out");
    *out = new mcm_graph{mcm::load_graph(name_or_path)};
  });
}

mcm_status mcm_graph_without_edge(const mcm_graph* g, const char* from, const char* to, mcm_graph** out) {
  return guarded([&] {
    need(g, "graph");
    need(out, "out");
    *out = new mcm_graph{g->g.without_edge(parse_one_role(from), parse_one_role(to))};
  });
}

mcm_status mcm_graph_save(const mcm_graph* g, const char* path) {
  return guarded([&] {
    need(g, "graph");
    need(path, "path");
    std::ofstream f(path);
    if (!f) mcm::fail(mcm::ErrorKind::Io, std::string("cannot write ") + path);
    mcm::write_edge_list(f, g->g);
  });
}

size_t mcm_graph_edge_count(const mcm_graph* g) { return g ? g->g.edges().size() : 0; }

mcm_status mcm_graph_dsep(const mcm_graph* g, const char* left, const char* right, const char* given,
                          int* separated) {
  return guarded([&] {
    need(g, "graph");
    need(separated, "separated");
    const auto q = mcm::make_query(g->g, parse_roles(g->g, left), parse_roles(g->g, right), parse_roles(g->g, given));
    *separated = mcm::d_separated(g->g, q) ? 1 : 0;
  });
}

void mcm_graph_free(mcm_graph* g) { delete g; }

mcm_status mcm_enumerate_dags(const char* kind, const char* out_dir, size_t* n_graphs, size_t* n_valid) {
  return guarded([&] {
    need(kind, "kind");
    need(out_dir, "out_dir");
    auto k = mcm::parse_candidate_kind(kind);
    if (!k) mcm::fail(mcm::ErrorKind::InvalidArgument, std::string("kind must be cit or cio, got '") + kind + "'");
    const auto s = mcm::export_candidates(*k, out_dir);
    if (n_graphs) *n_graphs = s.graphs;
    if (n_valid) *n_valid = s.valid;
  });
}

mcm_status mcm_config_create(int preset, mcm_config** out) {
  return guarded([&] {
    need(out, "out");
    if (preset != MCM_PRESET_PAPER && preset != MCM_PRESET_SMOKE)
      mcm::fail(mcm::ErrorKind::InvalidArgument, "unknown preset " + std::to_string(preset));
    *out = new mcm_config{preset == MCM_PRESET_PAPER ? mcm::paper_defaults() : mcm::smoke_defaults()};
  });
}

mcm_status mcm_config_load(mcm_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->cfg = mcm::load_config(path, cfg->cfg);
  });
}

mcm_status mcm_config_set(mcm_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    mcm::SweepConfig next = cfg->cfg;
    mcm::apply_setting(next, key, value);
    cfg->cfg = std::move(next);
  });
}

mcm_status mcm_config_get(const mcm_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    std::ostringstream all;
    mcm::write_config(all, cfg->cfg);
    std::istringstream in(all.str());
    const std::string prefix = std::string(key) + " = ";
    for (std::string line; std::getline(in, line);) {
      if (line.rfind(prefix, 0) != 0) continue;
      const std::string value = line.substr(prefix.size());
      if (needed) *needed = value.size();
      if (cap > 0) {
        need(buf, "buf");
        const size_t n = std::min(cap - 1, value.size());
        value.copy(buf, n);
        buf[n] = '\0';
      }
      return;
    }
    mcm::fail(mcm::ErrorKind::InvalidArgument, std::string("unknown config key '") + key + "'");
  });
}

mcm_status mcm_config_save(const mcm_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    std::ofstream f(path);
    if (!f) mcm::fail(mcm::ErrorKind::Io, std::string("cannot write ") + path);
    mcm::write_config(f, cfg->cfg);
  });
}

void mcm_config_free(mcm_config* cfg) { delete cfg; }

mcm_status mcm_dataset_generate(const mcm_config* cfg, mcm_dataset** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    mcm::DgpConfig dc = cfg->cfg.inner.dgp;
    dc.seed = cfg->cfg.inner.base_seed;
    auto p = std::make_unique<mcm_dataset>();
    p->ds = mcm::generate_dataset(dc);
    p->meta = mcm::meta_for(dc);
    *out = p.release();
  });
}

mcm_status mcm_dataset_load(const char* path, mcm_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto p = std::make_unique<mcm_dataset>();
    p->ds = mcm::load_dataset_csv(path, &p->meta);
    *out = p.release();
  });
}

mcm_status mcm_dataset_save(const mcm_dataset* ds, const char* path) {
  return guarded([&] {
    need(ds, "dataset");
    need(path, "path");
    mcm::save_dataset_csv(ds->ds, path, ds->meta);
  });
}

mcm_status mcm_dataset_shape(const mcm_dataset* ds, size_t* n, size_t* d, size_t* z_dim) {
  return guarded([&] {
    need(ds, "dataset");
    if (n) *n = ds->ds.n();
    if (d) *d = ds->ds.d();
    if (z_dim) *z_dim = ds->ds.z_dim;
  });
}

size_t mcm_dataset_absent_count(const mcm_dataset* ds) { return ds ? ds->ds.x_obs.absent_count() : 0; }

mcm_status mcm_dataset_impute(const mcm_dataset* ds, const char* scope, const char* method, int sweeps,
                              uint64_t seed, mcm_dataset** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(scope, "scope");
    need(method, "method");
    need(out, "out");
    auto sc = mcm::parse_scope(scope);
    if (!sc) mcm::fail(mcm::ErrorKind::InvalidArgument, std::string("unknown scope '") + scope + "'");
    auto m = mcm::parse_method(method);
    if (!m) mcm::fail(mcm::ErrorKind::InvalidArgument, std::string("unknown method '") + method + "'");
    mcm::MiceConfig mc;
    if (sweeps > 0) mc.sweeps = sweeps;
    mcm::Rng rng(seed);
    auto p = std::make_unique<mcm_dataset>(*ds);
    const auto cols = mcm::scope_columns(*sc, ds->ds.z_dim, ds->ds.d());
    mcm::fit_imputer(*m, ds->ds.x_obs, cols, mc, rng, &p->ds.x_obs);
    // The masks keep describing the original missingness; x_obs now has the
    // scope's cells filled.
    *out = p.release();
  });
}

void mcm_dataset_free(mcm_dataset* ds) { delete ds; }

mcm_status mcm_run_experiment(const mcm_config* cfg, size_t workers, mcm_progress_fn progress, void* user,
                              mcm_results** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    auto res = mcm::run_experiment(cfg->cfg.inner, options(workers, progress, user));
    auto p = std::make_unique<mcm_results>();
    p->cfg = cfg->cfg;
    for (const auto& a : res.aggregates) p->rows.push_back({cfg->cfg.inner.dgp.missingness_rate, a});
    p->r = std::move(res);
    *out = p.release();
  });
}

mcm_status mcm_run_sweep(const mcm_config* cfg, size_t workers, mcm_progress_fn progress, void* user,
                         mcm_results** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    auto res = mcm::run_sweep(cfg->cfg, options(workers, progress, user));
    auto p = std::make_unique<mcm_results>();
    p->cfg = cfg->cfg;
    p->rows = res.rows;
    p->r = std::move(res);
    *out = p.release();
  });
}

size_t mcm_results_cell_count(const mcm_results* r) {
  if (!r) return 0;
  if (auto e = std::get_if<mcm::ExperimentResult>(&r->r)) return e->cells.size();
  return 0;
}

size_t mcm_results_failure_count(const mcm_results* r) {
  if (!r) return 0;
  return std::visit([](const auto& x) { return x.failures.size(); }, r->r);
}

size_t mcm_results_row_count(const mcm_results* r) { return r ? r->rows.size() : 0; }

mcm_status mcm_results_row(const mcm_results* r, size_t index, mcm_aggregate_row* out) {
  return guarded([&] {
    need(r, "results");
    need(out, "out");
    if (index >= r->rows.size()) mcm::fail(mcm::ErrorKind::InvalidArgument, "row index out of range");
    const auto& s = r->rows[index];
    *out = {s.rate, s.row.scenario.c_str(), s.row.learner.c_str(), s.row.metric.c_str(), s.row.mean, s.row.std,
            s.row.count};
  });
}

mcm_status mcm_results_save(const mcm_results* r, const char* dir) {
  return guarded([&] {
    need(r, "results");
    need(dir, "dir");
    if (auto e = std::get_if<mcm::ExperimentResult>(&r->r)) mcm::save_experiment(*e, r->cfg, dir);
    else mcm::save_sweep(std::get<mcm::SweepResult>(r->r), r->cfg, dir);
  });
}

void mcm_results_free(mcm_results* r) { delete r; }

}  // extern "C"
