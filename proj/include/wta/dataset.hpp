#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wta/matrix.hpp"

namespace wta {

// Feature matrix with integer class labels. Immutable after load.
struct Dataset {
  Matrix features;               // M_total x K float32
  std::vector<uint32_t> labels;  // M_total class ids, each < num_classes
  uint32_t num_classes = 0;

  void validate() const;  // throws std::invalid_argument
};

// Binary formats (little-endian):
//   features "WTAF": magic, u32 version=1, u64 rows, u32 cols, rows*cols f32
//   labels   "WTAL": magic, u32 version=1, u64 rows, u32 num_classes, rows u32
// Loading rejects bad magic, bad version, truncation, feature/label row
// count mismatch and out-of-range labels, each with its own error.
Dataset load_binary(const std::string& features_path, const std::string& labels_path);
void save_binary(const Dataset& data, const std::string& features_path,
                 const std::string& labels_path);

// Rectangular numeric CSV; label_col picks the label column (negative
// counts from the end, -1 = last). num_classes is max label + 1.
Dataset load_csv(const std::string& path, int label_col);

// Seeded synthetic clusters standing in for pretrained-network features:
// per class a centroid uniform in [0,1]^K with `sparsity` of its
// coordinates zeroed, samples drawn as max(0, centroid + N(0, sigma)).
// Rows are class-major, exactly per_class per class.
Dataset gen_synthetic(uint32_t num_classes, uint32_t dim, uint32_t per_class, double sigma,
                      uint64_t seed, double sparsity = 0.75);

}  // namespace wta
