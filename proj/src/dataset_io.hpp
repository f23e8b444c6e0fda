#pragma once

#include "datagen.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace mcm {

struct DatasetMeta {
  std::size_t d = 0;
  std::size_t z_dim = 0;
  double rate = 0.0;
  std::uint64_t seed = 0;
  std::string generator;
};

// "data.csv" -> "data.meta"
std::string meta_path_for(const std::string& csv_path);

// Header x0..x{d-1},w,y[,y0,y1,cate]; absent cells are empty; floats use 17
// significant digits so values round-trip exactly.
void write_dataset_csv(std::ostream& out, const SyntheticDataset& ds);
// Masks are rebuilt from empty cells; x_full stays empty.
SyntheticDataset read_dataset_csv(std::istream& in, std::size_t z_dim);

void write_meta(std::ostream& out, const DatasetMeta& meta);
DatasetMeta read_meta(std::istream& in);

// Writes the CSV and its sidecar.
void save_dataset_csv(const SyntheticDataset& ds, const std::string& path, const DatasetMeta& meta);
// Reads the sidecar when present (for z_dim); otherwise z_dim = d / 2.
SyntheticDataset load_dataset_csv(const std::string& path, DatasetMeta* meta_out = nullptr);

DatasetMeta meta_for(const DgpConfig& cfg);

}  // namespace mcm
