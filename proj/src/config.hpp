#pragma once

#include "datagen.hpp"
#include "impute.hpp"
#include "learners.hpp"

#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <string>
#include <vector>

namespace mcm {

enum class ImputeFit { Train, Transductive };

struct ExperimentConfig {
  DgpConfig dgp;
  std::size_t n_sims = 10;
  std::size_t n_splits = 10;
  double test_fraction = 0.2;
  std::vector<ImputationScope> scopes{std::begin(kAllScopes), std::end(kAllScopes)};
  std::vector<LearnerKind> learners{std::begin(kAllLearners), std::end(kAllLearners)};
  BaseSpec base;
  PropensitySpec propensity;
  DrAte dr_ate = DrAte::Plugin;
  bool cross_fit = false;
  ImputeMethod imputer = ImputeMethod::Mice;
  MiceConfig mice;
  ImputeFit impute_fit = ImputeFit::Train;
  bool report_npehe = false;  // adds the normalized pehe metric
  std::uint64_t base_seed = 0;
  std::string out_dir = "results";

  void validate() const;
  MetaLearnerSpec learner_spec(LearnerKind k) const;
};

struct SweepConfig {
  std::vector<double> rates{0.1, 0.2, 0.3, 0.4, 0.5};
  ExperimentConfig inner;

  void validate() const;
};

// The evaluation protocol of the original study: n = 10000, d = 20,
// z_dim = 10, rate = 0.3, 10 sims x 10 splits, all scopes and learners.
SweepConfig paper_defaults();
// n = 2000, 3 sims x 3 splits; everything else as paper_defaults().
SweepConfig smoke_defaults();

// Flat "key = value" text; '#' starts a comment. Unknown keys and bad values
// raise Parse errors naming the line.
void apply_setting(SweepConfig& cfg, const std::string& key, const std::string& value);
void read_config(std::istream& in, SweepConfig& cfg);
SweepConfig load_config(const std::string& path, SweepConfig base = paper_defaults());
// Writes every key; read_config on the output reproduces cfg.
void write_config(std::ostream& out, const SweepConfig& cfg);

}  // namespace mcm
