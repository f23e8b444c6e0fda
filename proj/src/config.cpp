#include "config.hpp"

#include "error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace mcm {

void ExperimentConfig::validate() const {
  dgp.validate();
  require(n_sims >= 1, "sims must be >= 1");
  require(n_splits >= 1, "splits must be >= 1");
  require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction must lie in (0, 1)");
  require(!scopes.empty(), "at least one scope is required");
  require(!learners.empty(), "at least one learner is required");
  require(base.ridge.lambda >= 0.0, "ridge.lambda must be >= 0");
  base.gbt.validate();
  propensity.validate();
  mice.validate();
}

MetaLearnerSpec ExperimentConfig::learner_spec(LearnerKind k) const {
  return MetaLearnerSpec{k, base, propensity, dr_ate, cross_fit};
}

void SweepConfig::validate() const {
  inner.validate();
  require(!rates.empty(), "sweep needs at least one rate");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    require(rates[i] > 0.0 && rates[i] < 1.0, "sweep rates must lie in (0, 1)");
    require(i == 0 || rates[i - 1] < rates[i], "sweep rates must be strictly ascending");
  }
}

SweepConfig paper_defaults() { return SweepConfig{}; }

SweepConfig smoke_defaults() {
  SweepConfig c;
  c.inner.dgp.n = 2000;
  c.inner.n_sims = 3;
  c.inner.n_splits = 3;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string item = trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  fail(ErrorKind::Parse, "bad value for " + key + ": '" + value + "'");
}

template <class T>
T parse_num(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void apply_setting(SweepConfig& cfg, const std::string& key, const std::string& value) {
  ExperimentConfig& e = cfg.inner;
  if (key == "n") e.dgp.n = parse_num<std::size_t>(key, value);
  else if (key == "d") e.dgp.d = parse_num<std::size_t>(key, value);
  else if (key == "z_dim") e.dgp.z_dim = parse_num<std::size_t>(key, value);
  else if (key == "rate") e.dgp.missingness_rate = parse_num<double>(key, value);
  else if (key == "z_in_scale") {
    if (value == "row") e.dgp.z_in_scale = SliceScale::RowSlice;
    else if (value == "column") e.dgp.z_in_scale = SliceScale::ColumnStd;
    else bad_value(key, value);
  } else if (key == "seed") e.base_seed = parse_num<std::uint64_t>(key, value);
  else if (key == "sims") e.n_sims = parse_num<std::size_t>(key, value);
  else if (key == "splits") e.n_splits = parse_num<std::size_t>(key, value);
  else if (key == "test_fraction") e.test_fraction = parse_num<double>(key, value);
  else if (key == "scopes") {
    e.scopes.clear();
    for (const auto& s : split_list(value)) {
      auto sc = parse_scope(s);
      if (!sc) bad_value(key, s);
      e.scopes.push_back(*sc);
    }
  } else if (key == "learners") {
    e.learners.clear();
    for (const auto& s : split_list(value)) {
      auto k = parse_learner(s);
      if (!k) bad_value(key, s);
      e.learners.push_back(*k);
    }
  } else if (key == "base") {
    auto b = parse_base(value);
    if (!b) bad_value(key, value);
    e.base.kind = *b;
  } else if (key == "ridge.lambda") e.base.ridge.lambda = parse_num<double>(key, value);
  else if (key == "gbt.n_trees") e.base.gbt.n_trees = parse_num<int>(key, value);
  else if (key == "gbt.max_depth") e.base.gbt.max_depth = parse_num<int>(key, value);
  else if (key == "gbt.learning_rate") e.base.gbt.learning_rate = parse_num<double>(key, value);
  else if (key == "gbt.min_leaf") e.base.gbt.min_leaf = parse_num<int>(key, value);
  else if (key == "gbt.subsample") e.base.gbt.subsample = parse_num<double>(key, value);
  else if (key == "gbt.max_bins") e.base.gbt.max_bins = parse_num<int>(key, value);
  else if (key == "propensity.l2") e.propensity.l2 = parse_num<double>(key, value);
  else if (key == "propensity.clip_delta") e.propensity.clip_delta = parse_num<double>(key, value);
  else if (key == "propensity.max_iter") e.propensity.max_iter = parse_num<int>(key, value);
  else if (key == "propensity.tol") e.propensity.tol = parse_num<double>(key, value);
  else if (key == "dr_ate") {
    if (value == "plugin") e.dr_ate = DrAte::Plugin;
    else if (value == "aipw") e.dr_ate = DrAte::Aipw;
    else bad_value(key, value);
  } else if (key == "cross_fit") e.cross_fit = parse_bool(key, value);
  else if (key == "imputer") {
    auto m = parse_method(value);
    if (!m) bad_value(key, value);
    e.imputer = *m;
  } else if (key == "mice.sweeps") e.mice.sweeps = parse_num<int>(key, value);
  else if (key == "mice.ridge_lambda") e.mice.ridge_lambda = parse_num<double>(key, value);
  else if (key == "mice.stochastic") e.mice.stochastic = parse_bool(key, value);
  else if (key == "mice.tol") e.mice.tol = parse_num<double>(key, value);
  else if (key == "impute_fit") {
    if (value == "train") e.impute_fit = ImputeFit::Train;
    else if (value == "transductive") e.impute_fit = ImputeFit::Transductive;
    else bad_value(key, value);
  } else if (key == "npehe") e.report_npehe = parse_bool(key, value);
  else if (key == "out") e.out_dir = value;
  else if (key == "sweep.rates") {
    cfg.rates.clear();
    for (const auto& s : split_list(value)) cfg.rates.push_back(parse_num<double>(key, s));
  } else {
    fail(ErrorKind::Parse, "unknown config key '" + key + "'");
  }
}

void read_config(std::istream& in, SweepConfig& cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "config line " + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& err) {
      fail(ErrorKind::Parse, "config line " + std::to_string(lineno) + ": " + err.what());
    }
  }
}

SweepConfig load_config(const std::string& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path);
  read_config(in, base);
  return base;
}

void write_config(std::ostream& out, const SweepConfig& cfg) {
  const ExperimentConfig& e = cfg.inner;
  auto join = [](const auto& items, auto name) {
    std::string s;
    for (const auto& it : items) s += (s.empty() ? "" : ",") + std::string(name(it));
    return s;
  };
  out << "# data\n";
  out << "n = " << e.dgp.n << '\n';
  out << "d = " << e.dgp.d << '\n';
  out << "z_dim = " << e.dgp.z_dim << '\n';
  out << "rate = " << fmt(e.dgp.missingness_rate) << '\n';
  out << "z_in_scale = " << (e.dgp.z_in_scale == SliceScale::RowSlice ? "row" : "column") << '\n';
  out << "seed = " << e.base_seed << '\n';
  out << "# grid\n";
  out << "sims = " << e.n_sims << '\n';
  out << "splits = " << e.n_splits << '\n';
  out << "test_fraction = " << fmt(e.test_fraction) << '\n';
  out << "scopes = " << join(e.scopes, scope_name) << '\n';
  out << "learners = " << join(e.learners, learner_name) << '\n';
  out << "# models\n";
  out << "base = " << base_name(e.base.kind) << '\n';
  out << "ridge.lambda = " << fmt(e.base.ridge.lambda) << '\n';
  out << "gbt.n_trees = " << e.base.gbt.n_trees << '\n';
  out << "gbt.max_depth = " << e.base.gbt.max_depth << '\n';
  out << "gbt.learning_rate = " << fmt(e.base.gbt.learning_rate) << '\n';
  out << "gbt.min_leaf = " << e.base.gbt.min_leaf << '\n';
  out << "gbt.subsample = " << fmt(e.base.gbt.subsample) << '\n';
  out << "gbt.max_bins = " << e.base.gbt.max_bins << '\n';
  out << "propensity.l2 = " << fmt(e.propensity.l2) << '\n';
  out << "propensity.clip_delta = " << fmt(e.propensity.clip_delta) << '\n';
  out << "propensity.max_iter = " << e.propensity.max_iter << '\n';
  out << "propensity.tol = " << fmt(e.propensity.tol) << '\n';
  out << "dr_ate = " << (e.dr_ate == DrAte::Plugin ? "plugin" : "aipw") << '\n';
  out << "cross_fit = " << (e.cross_fit ? "true" : "false") << '\n';
  out << "# imputation\n";
  out << "imputer = " << method_name(e.imputer) << '\n';
  out << "mice.sweeps = " << e.mice.sweeps << '\n';
  out << "mice.ridge_lambda = " << fmt(e.mice.ridge_lambda) << '\n';
  out << "mice.stochastic = " << (e.mice.stochastic ? "true" : "false") << '\n';
  out << "mice.tol = " << fmt(e.mice.tol) << '\n';
  out << "impute_fit = " << (e.impute_fit == ImputeFit::Train ? "train" : "transductive") << '\n';
  out << "# output\n";
  out << "npehe = " << (e.report_npehe ? "true" : "false") << '\n';
  out << "out = " << e.out_dir << '\n';
  std::string rates;
  for (double r : cfg.rates) rates += (rates.empty() ? "" : ",") + fmt(r);
  out << "sweep.rates = " << rates << '\n';
}

}  // namespace mcm
