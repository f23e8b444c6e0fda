#include "dataset_io.hpp"

#include "error.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace mcm {

namespace {

void put_double(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    fail(ErrorKind::Parse, "row " + std::to_string(row) + ", column " + std::to_string(col) + ": non-numeric cell '" +
                               s + "'");
  return v;
}

}  // namespace

std::string meta_path_for(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".meta");
  return p.string();
}

void write_dataset_csv(std::ostream& out, const SyntheticDataset& ds) {
  const std::size_t d = ds.d();
  const bool truth = ds.has_truth();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "w,y";
  if (truth) out << ",y0,y1,cate";
  out << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < d; ++j) {
      if (auto v = ds.x_obs.at(r, static_cast<Eigen::Index>(j))) put_double(out, *v);
      out << ',';
    }
    out << ds.w[i] << ',';
    put_double(out, ds.y(r));
    if (truth) {
      out << ',';
      put_double(out, ds.y0(r));
      out << ',';
      put_double(out, ds.y1(r));
      out << ',';
      put_double(out, ds.cate(r));
    }
    out << '\n';
  }
}

SyntheticDataset read_dataset_csv(std::istream& in, std::size_t z_dim) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, "row 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);

  std::size_t d = 0;
  while (d < header.size() && header[d] == "x" + std::to_string(d)) ++d;
  if (d == 0) fail(ErrorKind::Parse, "row 1: header must start with x0");
  const std::size_t rest = header.size() - d;
  const bool truth = rest == 5;
  if (!(rest == 2 || rest == 5) || header[d] != "w" || header[d + 1] != "y" ||
      (truth && (header[d + 2] != "y0" || header[d + 3] != "y1" || header[d + 4] != "cate")))
    fail(ErrorKind::Parse, "row 1: malformed header, expected x0..x{d-1},w,y[,y0,y1,cate]");
  if (z_dim == 0) z_dim = d / 2;
  if (z_dim == 0 || z_dim >= d) fail(ErrorKind::Parse, "z_dim incompatible with header width");

  std::vector<std::vector<std::optional<double>>> xs;
  std::vector<int> w;
  std::vector<std::array<double, 4>> tail;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail(ErrorKind::Parse, "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(cells.size()));
    std::vector<std::optional<double>> xr(d);
    for (std::size_t j = 0; j < d; ++j)
      if (!cells[j].empty()) xr[j] = parse_double(cells[j], row, j + 1);
    const std::string& wc = cells[d];
    if (wc != "0" && wc != "1")
      fail(ErrorKind::Parse, "row " + std::to_string(row) + ", column " + std::to_string(d + 1) +
                                 ": treatment must be 0 or 1, got '" + wc + "'");
    std::array<double, 4> t{};
    for (std::size_t k = 0; k < rest - 1; ++k) {
      const std::size_t col = d + 1 + k;
      if (cells[col].empty())
        fail(ErrorKind::Parse, "row " + std::to_string(row) + ", column " + std::to_string(col + 1) + ": empty cell");
      t[k] = parse_double(cells[col], row, col + 1);
    }
    xs.push_back(std::move(xr));
    w.push_back(wc == "1" ? 1 : 0);
    tail.push_back(t);
  }

  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto zd = static_cast<Eigen::Index>(z_dim);
  SyntheticDataset ds;
  ds.z_dim = z_dim;
  ds.x_obs = MaskedMatrix(n, static_cast<Eigen::Index>(d));
  ds.z_out_mask = Mask::Constant(n, zd, true);
  ds.z_in_mask = Mask::Constant(n, static_cast<Eigen::Index>(d) - zd, true);
  ds.w = std::move(w);
  ds.y.resize(n);
  if (truth) {
    ds.y0.resize(n);
    ds.y1.resize(n);
    ds.cate.resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& xr = xs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
      if (xr[static_cast<std::size_t>(j)]) {
        ds.x_obs.set(i, j, *xr[static_cast<std::size_t>(j)]);
      } else if (j < zd) {
        ds.z_out_mask(i, j) = false;
      } else {
        ds.z_in_mask(i, j - zd) = false;
      }
    }
    const auto& t = tail[static_cast<std::size_t>(i)];
    ds.y(i) = t[0];
    if (truth) {
      ds.y0(i) = t[1];
      ds.y1(i) = t[2];
      ds.cate(i) = t[3];
    }
  }
  return ds;
}

void write_meta(std::ostream& out, const DatasetMeta& meta) {
  out << "d=" << meta.d << '\n';
  out << "z_dim=" << meta.z_dim << '\n';
  out << "rate=";
  put_double(out, meta.rate);
  out << '\n';
  out << "seed=" << meta.seed << '\n';
  out << "generator=" << meta.generator << '\n';
}

DatasetMeta read_meta(std::istream& in) {
  DatasetMeta m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Parse, "meta line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    try {
      if (key == "d") m.d = std::stoul(val);
      else if (key == "z_dim") m.z_dim = std::stoul(val);
      else if (key == "rate") m.rate = std::stod(val);
      else if (key == "seed") m.seed = std::stoull(val);
      else if (key == "generator") m.generator = val;
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "meta line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  return m;
}

void save_dataset_csv(const SyntheticDataset& ds, const std::string& path, const DatasetMeta& meta) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  write_dataset_csv(out, ds);
  std::ofstream mo(meta_path_for(path));
  if (!mo) fail(ErrorKind::Io, "cannot write " + meta_path_for(path));
  write_meta(mo, meta);
}

SyntheticDataset load_dataset_csv(const std::string& path, DatasetMeta* meta_out) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  DatasetMeta meta;
  if (std::ifstream mi(meta_path_for(path)); mi) meta = read_meta(mi);
  SyntheticDataset ds = read_dataset_csv(in, meta.z_dim);
  if (meta.d == 0) meta.d = ds.d();
  if (meta.z_dim == 0) meta.z_dim = ds.z_dim;
  if (meta.d != ds.d()) fail(ErrorKind::Parse, "meta d=" + std::to_string(meta.d) + " disagrees with CSV width");
  if (meta_out) *meta_out = meta;
  return ds;
}

DatasetMeta meta_for(const DgpConfig& cfg) {
  return DatasetMeta{cfg.d, cfg.z_dim, cfg.missingness_rate, cfg.seed, Rng::kName};
}

}  // namespace mcm
