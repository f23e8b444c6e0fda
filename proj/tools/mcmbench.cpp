// mcmbench: command-line front end over the libmcm C API.
#include "mcm/mcm.h"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RuntimeFailure {
  std::string message;
};

void check(mcm_status s, const std::string& what) {
  if (s != MCM_OK) throw RuntimeFailure{what + ": " + mcm_status_name(s) + ": " + mcm_last_error()};
}

// Config options shared by generate, run and sweep.
struct ConfigFlags {
  std::string config_path;
  bool paper_defaults = false;
  bool smoke = false;
  std::optional<unsigned long long> seed;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    auto* pd = app->add_flag("--paper-defaults", paper_defaults,
                             "start from the study protocol: n=10000, d=20, z_dim=10, rate=0.3, 10x10 grid");
    auto* sm = app->add_flag("--smoke", smoke, "start from the smoke grid: n=2000, 3 sims x 3 splits");
    pd->excludes(sm);
    app->add_option("--seed", seed, "base seed");
    app->add_option("--set", sets, "override one config key, as key=value (repeatable)");
  }

  // Preset, then the config file, then --set, then the dedicated flags.
  mcm_config* build(const std::vector<std::pair<std::string, std::string>>& extra) const {
    mcm_config* cfg = nullptr;
    check(mcm_config_create(smoke ? MCM_PRESET_SMOKE : MCM_PRESET_PAPER, &cfg), "config");
    try {
      if (!config_path.empty()) check(mcm_config_load(cfg, config_path.c_str()), "config " + config_path);
      for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
        check(mcm_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()), "--set " + kv);
      }
      for (const auto& [k, v] : extra) check(mcm_config_set(cfg, k.c_str(), v.c_str()), "--" + k);
      if (seed) check(mcm_config_set(cfg, "seed", std::to_string(*seed).c_str()), "--seed");
    } catch (...) {
      mcm_config_free(cfg);
      throw;
    }
    return cfg;
  }
};

void print_progress(size_t done, size_t total, void*) {
  std::fprintf(stderr, "\r%zu/%zu tasks", done, total);
  if (done == total) std::fputc('\n', stderr);
  std::fflush(stderr);
}

template <class T>
void opt_set(std::vector<std::pair<std::string, std::string>>& out, const char* key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) out.emplace_back(key, *v);
  else out.emplace_back(key, std::to_string(*v));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark for treatment-effect estimation under mixed confounded missingness"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress and summaries");
  app.set_version_flag("--version", std::string(mcm_version()));

  // generate
  auto* gen = app.add_subcommand("generate", "simulate one dataset and write it as CSV");
  ConfigFlags gen_cfg;
  gen_cfg.add(gen);
  std::string gen_out = "data.csv";
  std::optional<std::size_t> gen_n, gen_d, gen_z;
  std::optional<double> gen_rate;
  gen->add_option("--out", gen_out, "output CSV (a .meta sidecar is written next to it)");
  gen->add_option("--n", gen_n, "rows");
  gen->add_option("--d", gen_d, "covariates");
  gen->add_option("--z-dim", gen_z, "width of the Z_out block");
  gen->add_option("--rate", gen_rate, "missingness rate");
  gen->add_flag("--quiet", quiet, "suppress the summary line");

  // impute
  auto* imp = app.add_subcommand("impute", "fill one column block of a dataset CSV");
  std::string imp_in, imp_out = "imputed.csv", imp_scope = "selective", imp_method = "mice";
  int imp_sweeps = 0;
  unsigned long long imp_seed = 0;
  imp->add_option("--in", imp_in, "input dataset CSV")->required()->check(CLI::ExistingFile);
  imp->add_option("--scope", imp_scope, "all | nothing | selective | complement")
      ->check(CLI::IsMember({"all", "nothing", "selective", "complement"}));
  imp->add_option("--method", imp_method, "mice | mean")->check(CLI::IsMember({"mice", "mean"}));
  imp->add_option("--sweeps", imp_sweeps, "MICE sweeps (default 10)")->check(CLI::PositiveNumber);
  imp->add_option("--seed", imp_seed, "seed for stochastic imputation");
  imp->add_option("--out", imp_out, "output CSV");
  imp->add_flag("--quiet", quiet, "suppress the summary line");

  // run
  auto* run = app.add_subcommand("run", "run the sims x splits x scopes x learners grid");
  ConfigFlags run_cfg;
  run_cfg.add(run);
  std::optional<std::string> run_out;
  std::size_t run_workers = 0;
  run->add_option("--out", run_out, "output directory (default: the config's out key)");
  run->add_option("--workers", run_workers, "worker threads (default: MCM_WORKERS or all cores)");
  run->add_flag("--quiet", quiet, "suppress progress and summaries");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "repeat the grid over several missingness rates");
  ConfigFlags sweep_cfg;
  sweep_cfg.add(sweep);
  std::optional<std::string> sweep_out, sweep_rates;
  std::size_t sweep_workers = 0;
  sweep->add_option("--rates", sweep_rates, "comma-separated ascending rates (default 0.1,0.2,0.3,0.4,0.5)");
  sweep->add_option("--out", sweep_out, "output directory (default: the config's out key)");
  sweep->add_option("--workers", sweep_workers, "worker threads (default: MCM_WORKERS or all cores)");
  sweep->add_flag("--quiet", quiet, "suppress progress and summaries");

  // enumerate-dags
  auto* en = app.add_subcommand("enumerate-dags", "write the CIT or CIO candidate DAGs and their validity");
  std::string en_kind, en_out = "dags";
  en->add_option("--kind", en_kind, "cit | cio")->required()->check(CLI::IsMember({"cit", "cio"}));
  en->add_option("--out", en_out, "output directory");
  en->add_flag("--quiet", quiet, "suppress the summary line");

  // dsep
  auto* ds = app.add_subcommand("dsep", "test a d-separation statement; prints true or false");
  std::string ds_graph, ds_left, ds_right, ds_given;
  std::vector<std::string> ds_cut;
  ds->add_option("--graph", ds_graph, "built-in name (ignorability, mcar, mnar, mcm, mcm-full) or edge-list file")
      ->required();
  ds->add_option("--left", ds_left, "comma-separated nodes")->required();
  ds->add_option("--right", ds_right, "comma-separated nodes")->required();
  ds->add_option("--given", ds_given, "comma-separated conditioning nodes");
  ds->add_option("--remove-edge", ds_cut, "drop an edge first, as FROM,TO (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      std::vector<std::pair<std::string, std::string>> extra;
      opt_set(extra, "n", gen_n);
      opt_set(extra, "d", gen_d);
      opt_set(extra, "z_dim", gen_z);
      if (gen_rate) extra.emplace_back("rate", CLI::detail::to_string(*gen_rate));
      mcm_config* cfg = gen_cfg.build(extra);
      mcm_dataset* data = nullptr;
      const mcm_status s = mcm_dataset_generate(cfg, &data);
      mcm_config_free(cfg);
      check(s, "generate");
      const mcm_status w = mcm_dataset_save(data, gen_out.c_str());
      size_t n = 0, d = 0, z = 0;
      mcm_dataset_shape(data, &n, &d, &z);
      const size_t absent = mcm_dataset_absent_count(data);
      mcm_dataset_free(data);
      check(w, "write " + gen_out);
      if (!quiet) std::fprintf(stderr, "wrote %s: n=%zu d=%zu z_dim=%zu absent=%zu\n", gen_out.c_str(), n, d, z, absent);
    } else if (*imp) {
      mcm_dataset* in = nullptr;
      check(mcm_dataset_load(imp_in.c_str(), &in), "read " + imp_in);
      mcm_dataset* out = nullptr;
      const mcm_status s = mcm_dataset_impute(in, imp_scope.c_str(), imp_method.c_str(), imp_sweeps, imp_seed, &out);
      const size_t before = mcm_dataset_absent_count(in);
      mcm_dataset_free(in);
      check(s, "impute");
      const size_t after = mcm_dataset_absent_count(out);
      const mcm_status w = mcm_dataset_save(out, imp_out.c_str());
      mcm_dataset_free(out);
      check(w, "write " + imp_out);
      if (!quiet) std::fprintf(stderr, "wrote %s: absent cells %zu -> %zu\n", imp_out.c_str(), before, after);
    } else if (*run || *sweep) {
      const bool is_run = run->parsed();
      const ConfigFlags& flags = is_run ? run_cfg : sweep_cfg;
      std::vector<std::pair<std::string, std::string>> extra;
      opt_set(extra, "out", is_run ? run_out : sweep_out);
      if (!is_run) opt_set(extra, "sweep.rates", sweep_rates);
      mcm_config* cfg = flags.build(extra);
      std::string out_dir;
      for (const auto& kv : extra)
        if (kv.first == "out") out_dir = kv.second;
      mcm_results* res = nullptr;
      const size_t workers = is_run ? run_workers : sweep_workers;
      mcm_progress_fn progress = quiet ? nullptr : print_progress;
      const mcm_status s = is_run ? mcm_run_experiment(cfg, workers, progress, nullptr, &res)
                                  : mcm_run_sweep(cfg, workers, progress, nullptr, &res);
      if (out_dir.empty()) {
        size_t len = 0;
        check(mcm_config_get(cfg, "out", nullptr, 0, &len), "config out");
        std::string buf(len + 1, '\0');
        check(mcm_config_get(cfg, "out", buf.data(), buf.size(), &len), "config out");
        out_dir = buf.substr(0, len);
      }
      mcm_config_free(cfg);
      check(s, is_run ? "run" : "sweep");
      const mcm_status w = mcm_results_save(res, out_dir.c_str());
      const size_t failures = mcm_results_failure_count(res);
      const size_t cells = mcm_results_cell_count(res);
      const size_t rows = mcm_results_row_count(res);
      mcm_results_free(res);
      check(w, "write " + out_dir);
      if (!quiet) {
        if (is_run) std::fprintf(stderr, "wrote %s: %zu metric records, %zu aggregate rows\n", out_dir.c_str(), cells, rows);
        else std::fprintf(stderr, "wrote %s: %zu sweep rows\n", out_dir.c_str(), rows);
      }
      if (failures > 0) {
        std::fprintf(stderr, "%zu grid cells failed; see %s/failures.csv\n", failures, out_dir.c_str());
        return kExitRuntime;
      }
    } else if (*en) {
      size_t graphs = 0, valid = 0;
      check(mcm_enumerate_dags(en_kind.c_str(), en_out.c_str(), &graphs, &valid), "enumerate-dags");
      if (!quiet) std::fprintf(stderr, "wrote %zu %s graphs to %s, %zu valid\n", graphs, en_kind.c_str(), en_out.c_str(), valid);
    } else if (*ds) {
      mcm_graph* g = nullptr;
      check(mcm_graph_load(ds_graph.c_str(), &g), "graph " + ds_graph);
      for (const auto& cut : ds_cut) {
        const auto comma = cut.find(',');
        mcm_graph* next = nullptr;
        const mcm_status s =
            comma == std::string::npos
                ? (mcm_graph_free(g), g = nullptr, MCM_ERR_INVALID_ARGUMENT)
                : mcm_graph_without_edge(g, cut.substr(0, comma).c_str(), cut.substr(comma + 1).c_str(), &next);
        mcm_graph_free(g);
        g = next;
        if (comma == std::string::npos) throw RuntimeFailure{"--remove-edge expects FROM,TO, got '" + cut + "'"};
        check(s, "--remove-edge " + cut);
      }
      int sep = 0;
      const mcm_status s = mcm_graph_dsep(g, ds_left.c_str(), ds_right.c_str(), ds_given.c_str(), &sep);
      mcm_graph_free(g);
      check(s, "dsep");
      std::puts(sep ? "true" : "false");
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitUsage;
  } catch (const RuntimeFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return kExitRuntime;
  }
  return kExitOk;
}
