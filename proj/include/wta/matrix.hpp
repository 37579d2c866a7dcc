#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wta {

// Row-major float32 matrix. Weight matrices keep one output unit per row,
// feature batches one sample per row.
struct Matrix {
  uint32_t rows = 0;
  uint32_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(uint32_t r, uint32_t c, float fill = 0.0f)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  float* row(uint32_t i) { return data.data() + static_cast<size_t>(i) * cols; }
  const float* row(uint32_t i) const { return data.data() + static_cast<size_t>(i) * cols; }

  float& at(uint32_t i, uint32_t j) { return data[static_cast<size_t>(i) * cols + j]; }
  float at(uint32_t i, uint32_t j) const { return data[static_cast<size_t>(i) * cols + j]; }

  size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
};

}  // namespace wta
