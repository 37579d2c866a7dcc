#include "wta/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wta/io.hpp"
#include "wta/rng.hpp"

namespace wta {

void Dataset::validate() const {
  if (features.rows == 0) throw std::invalid_argument("dataset: no rows");
  if (labels.size() != features.rows)
    throw std::invalid_argument("dataset: feature/label row count mismatch");
  if (num_classes == 0) throw std::invalid_argument("dataset: num_classes must be positive");
  for (uint32_t l : labels)
    if (l >= num_classes) throw std::invalid_argument("dataset: label out of range");
  for (float v : features.data)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature value");
}

Dataset load_binary(const std::string& features_path, const std::string& labels_path) {
  std::ifstream fs(features_path, std::ios::binary);
  if (!fs) throw std::runtime_error("WTAF: cannot open " + features_path);
  io::expect_magic(fs, "WTAF", "WTAF");
  io::expect_version(fs, 1, "WTAF");
  uint64_t rows = io::read_u64(fs, "WTAF");
  uint32_t cols = io::read_u32(fs, "WTAF");
  if (rows == 0 || cols == 0) throw std::runtime_error("WTAF: empty feature matrix");
  if (rows > 0xffffffffull) throw std::runtime_error("WTAF: row count exceeds supported size");

  Dataset data;
  data.features = Matrix(static_cast<uint32_t>(rows), cols);
  for (size_t i = 0; i < data.features.data.size(); ++i)
    data.features.data[i] = io::read_f32(fs, "WTAF");

  std::ifstream ls(labels_path, std::ios::binary);
  if (!ls) throw std::runtime_error("WTAL: cannot open " + labels_path);
  io::expect_magic(ls, "WTAL", "WTAL");
  io::expect_version(ls, 1, "WTAL");
  uint64_t label_rows = io::read_u64(ls, "WTAL");
  data.num_classes = io::read_u32(ls, "WTAL");
  if (label_rows != rows)
    throw std::runtime_error("WTAL: label row count " + std::to_string(label_rows) +
                             " does not match feature row count " + std::to_string(rows));
  data.labels.resize(label_rows);
  for (size_t i = 0; i < label_rows; ++i) {
    uint32_t l = io::read_u32(ls, "WTAL");
    if (l >= data.num_classes)
      throw std::runtime_error("WTAL: label " + std::to_string(l) + " out of range for " +
                               std::to_string(data.num_classes) + " classes");
    data.labels[i] = l;
  }
  data.validate();
  return data;
}

void save_binary(const Dataset& data, const std::string& features_path,
                 const std::string& labels_path) {
  data.validate();
  {
    std::ofstream fs(features_path, std::ios::binary);
    if (!fs) throw std::runtime_error("WTAF: cannot open " + features_path + " for writing");
    io::write_magic(fs, "WTAF");
    io::write_u32(fs, 1);
    io::write_u64(fs, data.features.rows);
    io::write_u32(fs, data.features.cols);
    for (float v : data.features.data) io::write_f32(fs, v);
    if (!fs) throw std::runtime_error("WTAF: write failed");
  }
  {
    std::ofstream ls(labels_path, std::ios::binary);
    if (!ls) throw std::runtime_error("WTAL: cannot open " + labels_path + " for writing");
    io::write_magic(ls, "WTAL");
    io::write_u32(ls, 1);
    io::write_u64(ls, data.labels.size());
    io::write_u32(ls, data.num_classes);
    for (uint32_t l : data.labels) io::write_u32(ls, l);
    if (!ls) throw std::runtime_error("WTAL: write failed");
  }
}

Dataset load_csv(const std::string& path, int label_col) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("csv: cannot open " + path);

  std::vector<std::vector<float>> rows;
  std::string line;
  size_t width = 0;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<float> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      size_t used = 0;
      float v;
      try {
        v = std::stof(cell, &used);
      } catch (const std::exception&) {
        throw std::runtime_error("csv: non-numeric cell \"" + cell + "\" at line " +
                                 std::to_string(line_no));
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used != cell.size())
        throw std::runtime_error("csv: non-numeric cell \"" + cell + "\" at line " +
                                 std::to_string(line_no));
      row.push_back(v);
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw std::runtime_error("csv: ragged row at line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no rows in " + path);
  if (width < 2) throw std::runtime_error("csv: need at least one feature and a label column");

  int col = label_col < 0 ? static_cast<int>(width) + label_col : label_col;
  if (col < 0 || col >= static_cast<int>(width))
    throw std::runtime_error("csv: label column out of range");

  Dataset data;
  data.features = Matrix(static_cast<uint32_t>(rows.size()), static_cast<uint32_t>(width - 1));
  data.labels.resize(rows.size());
  uint32_t max_label = 0;
  for (size_t j = 0; j < rows.size(); ++j) {
    float lv = rows[j][col];
    if (lv < 0.0f || lv != std::floor(lv))
      throw std::runtime_error("csv: label must be a nonnegative integer at line " +
                               std::to_string(j + 1));
    data.labels[j] = static_cast<uint32_t>(lv);
    max_label = std::max(max_label, data.labels[j]);
    float* dst = data.features.row(static_cast<uint32_t>(j));
    size_t k = 0;
    for (size_t c = 0; c < width; ++c)
      if (static_cast<int>(c) != col) dst[k++] = rows[j][c];
  }
  data.num_classes = max_label + 1;
  data.validate();
  return data;
}

Dataset gen_synthetic(uint32_t num_classes, uint32_t dim, uint32_t per_class, double sigma,
                      uint64_t seed, double sparsity) {
  if (num_classes == 0 || dim == 0 || per_class == 0)
    throw std::invalid_argument("gen_synthetic: all sizes must be positive");
  if (sigma < 0.0) throw std::invalid_argument("gen_synthetic: sigma must be nonnegative");
  if (sparsity < 0.0 || sparsity >= 1.0)
    throw std::invalid_argument("gen_synthetic: sparsity must be in [0, 1)");

  Dataset data;
  data.num_classes = num_classes;
  data.features = Matrix(num_classes * per_class, dim);
  data.labels.resize(static_cast<size_t>(num_classes) * per_class);

  const uint32_t zero_count = static_cast<uint32_t>(sparsity * dim + 0.5);
  SplitMix64 rng(mix_seed(seed, 0x5a17));
  std::vector<float> centroid(dim);
  std::vector<uint32_t> coords(dim);
  uint32_t row = 0;
  for (uint32_t cls = 0; cls < num_classes; ++cls) {
    for (uint32_t k = 0; k < dim; ++k) centroid[k] = static_cast<float>(rng.next_double());
    std::iota(coords.begin(), coords.end(), 0u);
    for (uint32_t z = 0; z < zero_count; ++z) {
      uint32_t j = z + static_cast<uint32_t>(rng.next_below(dim - z));
      std::swap(coords[z], coords[j]);
      centroid[coords[z]] = 0.0f;
    }
    for (uint32_t s = 0; s < per_class; ++s, ++row) {
      float* dst = data.features.row(row);
      for (uint32_t k = 0; k < dim; ++k) {
        double v = centroid[k] + sigma * rng.next_gaussian();
        dst[k] = static_cast<float>(std::max(0.0, v));
      }
      data.labels[row] = cls;
    }
  }
  return data;
}

}  // namespace wta
