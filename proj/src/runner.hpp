#pragma once

#include "config.hpp"
#include "metrics.hpp"
#include "mgraph.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mcm {

// Seed of one grid cell. Built from combine_seed, so it depends only on its
// inputs and never on scheduling.
std::uint64_t derive_cell_seed(std::uint64_t base_seed, std::size_t sim, std::size_t split, std::size_t scope,
                               std::size_t learner);
// Seed of the sim-th simulated dataset.
std::uint64_t derive_dataset_seed(std::uint64_t base_seed, std::size_t sim);

// Worker count from MCM_WORKERS, else the hardware concurrency (at least 1).
std::size_t default_workers();

struct CellFailure {
  std::size_t sim = 0;
  std::size_t split = 0;
  std::string scenario;
  std::string learner;
  std::string message;
};

struct ExperimentResult {
  std::vector<CellResult> cells;  // canonical order
  std::vector<AggregateRow> aggregates;
  std::vector<CellFailure> failures;
  std::size_t grid_cells = 0;  // sims * splits * scopes * learners
};

struct RunOptions {
  std::size_t workers = 0;  // 0 = default_workers()
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Train/test split of sim `sim`, split `split`: independent shuffles of 0..n-1,
// each returned in ascending order.
struct SplitIndices {
  std::vector<std::size_t> train, test;
};
SplitIndices make_split(std::size_t n, double test_fraction, std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct SweepRow {
  double rate = 0.0;
  AggregateRow row;
};
struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<CellFailure> failures;
};
SweepResult run_sweep(const SweepConfig& cfg, const RunOptions& opts = {});

void write_cells_csv(std::ostream& out, const std::vector<CellResult>& cells);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
void write_failures_csv(std::ostream& out, const std::vector<CellFailure>& failures);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
// Whitespace-separated blocks, one per (learner, metric): a rate column then
// one mean column per scenario. Blocks are separated by two blank lines so
// gnuplot's "index" selects them.
void write_sweep_plot_data(std::ostream& out, const std::vector<SweepRow>& rows);

// cells.csv, aggregate.csv, failures.csv and config.cfg under dir.
void save_experiment(const ExperimentResult& r, const SweepConfig& cfg, const std::string& dir);
// sweep.csv, sweep_plot.dat, failures.csv and config.cfg under dir.
void save_sweep(const SweepResult& r, const SweepConfig& cfg, const std::string& dir);

struct EnumerationSummary {
  std::size_t graphs = 0;
  std::size_t valid = 0;
};
// One edge-list file per candidate (<label>.tsv) plus validity.csv.
EnumerationSummary export_candidates(CandidateKind kind, const std::string& dir);

}  // namespace mcm
