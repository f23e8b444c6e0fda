#ifndef MCM_MCM_H
#define MCM_MCM_H

#include <stddef.h>
#include <stdint.h>

#if defined(MCM_BUILDING_LIBRARY)
#define MCM_API __attribute__((visibility("default")))
#else
#define MCM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure mcm_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum mcm_status {
  MCM_OK = 0,
  MCM_ERR_INVALID_ARGUMENT = 1,
  MCM_ERR_QUERY = 2,
  MCM_ERR_PARSE = 3,
  MCM_ERR_OVERLAP = 4,
  MCM_ERR_IO = 5,
  MCM_ERR_INTERNAL = 6
} mcm_status;

typedef struct mcm_graph mcm_graph;
typedef struct mcm_dataset mcm_dataset;
typedef struct mcm_config mcm_config;
typedef struct mcm_results mcm_results;

MCM_API const char* mcm_last_error(void);
MCM_API const char* mcm_version(void);
MCM_API const char* mcm_status_name(mcm_status s);

/* Graphs. Node names: X Xout Xin Xt Zout Zin Z W Y Ximp. Built-in graphs:
 * ignorability, mcar, mnar, mcm, mcm-full. */
MCM_API mcm_status mcm_graph_builtin(const char* name, mcm_graph** out);
/* A built-in name or a path to an edge-list file. */
MCM_API mcm_status mcm_graph_load(const char* name_or_path, mcm_graph** out);
MCM_API mcm_status mcm_graph_without_edge(const mcm_graph* g, const char* from, const char* to, mcm_graph** out);
MCM_API mcm_status mcm_graph_save(const mcm_graph* g, const char* path);
MCM_API size_t mcm_graph_edge_count(const mcm_graph* g);
/* left, right and given are comma-separated node names; given may be empty. */
MCM_API mcm_status mcm_graph_dsep(const mcm_graph* g, const char* left, const char* right, const char* given,
                                  int* separated);
MCM_API void mcm_graph_free(mcm_graph* g);

/* kind is "cit" or "cio". Writes one edge-list file per candidate plus
 * validity.csv into out_dir. */
MCM_API mcm_status mcm_enumerate_dags(const char* kind, const char* out_dir, size_t* n_graphs, size_t* n_valid);

/* Configs. preset 0 = the study defaults, 1 = the smoke grid. */
enum { MCM_PRESET_PAPER = 0, MCM_PRESET_SMOKE = 1 };
MCM_API mcm_status mcm_config_create(int preset, mcm_config** out);
/* Applies a key = value file on top of cfg. */
MCM_API mcm_status mcm_config_load(mcm_config* cfg, const char* path);
MCM_API mcm_status mcm_config_set(mcm_config* cfg, const char* key, const char* value);
/* Copies the value of key (as config_save would write it) into buf, NUL
 * terminated. *needed receives the length without the NUL; a buf of cap 0
 * only queries the length. */
MCM_API mcm_status mcm_config_get(const mcm_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
MCM_API mcm_status mcm_config_save(const mcm_config* cfg, const char* path);
MCM_API void mcm_config_free(mcm_config* cfg);

/* Datasets. generate uses n, d, z_dim, rate, z_in_scale and seed of cfg;
 * the seed is used as the dataset seed directly. */
MCM_API mcm_status mcm_dataset_generate(const mcm_config* cfg, mcm_dataset** out);
MCM_API mcm_status mcm_dataset_load(const char* path, mcm_dataset** out);
/* Writes the CSV and its .meta sidecar. */
MCM_API mcm_status mcm_dataset_save(const mcm_dataset* ds, const char* path);
MCM_API mcm_status mcm_dataset_shape(const mcm_dataset* ds, size_t* n, size_t* d, size_t* z_dim);
MCM_API size_t mcm_dataset_absent_count(const mcm_dataset* ds);
/* scope: all | nothing | selective | complement; method: mice | mean;
 * sweeps <= 0 keeps the default. */
MCM_API mcm_status mcm_dataset_impute(const mcm_dataset* ds, const char* scope, const char* method, int sweeps,
                                      uint64_t seed, mcm_dataset** out);
MCM_API void mcm_dataset_free(mcm_dataset* ds);

/* Experiments. workers = 0 picks MCM_WORKERS or the hardware concurrency. */
typedef void (*mcm_progress_fn)(size_t done, size_t total, void* user);
MCM_API mcm_status mcm_run_experiment(const mcm_config* cfg, size_t workers, mcm_progress_fn progress, void* user,
                                      mcm_results** out);
MCM_API mcm_status mcm_run_sweep(const mcm_config* cfg, size_t workers, mcm_progress_fn progress, void* user,
                                 mcm_results** out);

typedef struct mcm_aggregate_row {
  double rate; /* missingness rate of the row's experiment */
  const char* scenario;
  const char* learner;
  const char* metric;
  double mean;
  double std;
  size_t count;
} mcm_aggregate_row;

MCM_API size_t mcm_results_cell_count(const mcm_results* r);
MCM_API size_t mcm_results_failure_count(const mcm_results* r);
MCM_API size_t mcm_results_row_count(const mcm_results* r);
/* Strings stay valid until mcm_results_free. */
MCM_API mcm_status mcm_results_row(const mcm_results* r, size_t index, mcm_aggregate_row* out);
/* run: cells.csv, aggregate.csv, failures.csv, config.cfg.
 * sweep: sweep.csv, sweep_plot.dat, failures.csv, config.cfg. */
MCM_API mcm_status mcm_results_save(const mcm_results* r, const char* dir);
MCM_API void mcm_results_free(mcm_results* r);

#ifdef __cplusplus
}
#endif

#endif
