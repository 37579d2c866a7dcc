#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wta/index.hpp"
#include "wta/matrix.hpp"

namespace wta {

// Shared accumulation kernels. Both are compiled exactly once (never
// inlined) and accumulate strictly left to right in 32-bit floats, so every
// caller — dense or sparse — produces bit-identical values for the same
// operands.
float dot_f32(const float* a, const float* b, size_t n) noexcept;
void axpy_f32(float* y, float a, const float* x, size_t n) noexcept;

// Multiply-add count issued through dot_f32 by the calling thread.
uint64_t mac_count() noexcept;
void reset_mac_count() noexcept;

// Y = X * W^T, one dot_f32 per (sample, unit).
Matrix forward_dense(const Matrix& x, const Matrix& w, unsigned threads = 1);

// Per-sample sparse slice of the layer output: unit ids and logits aligned
// index-for-index with the sample's ActiveSet.
struct SparseRow {
  std::vector<uint32_t> units;
  std::vector<float> values;
};

struct SparseOutput {
  std::vector<SparseRow> rows;
  float default_logit = 0.0f;
  uint32_t total_units = 0;
};

// Logits for the active units only, via the same dot_f32 as forward_dense;
// every other unit implicitly holds default_logit.
SparseOutput forward_sparse(const Matrix& x, const Matrix& w,
                            std::span<const ActiveSet> active, float default_logit,
                            unsigned threads = 1);

struct DenseLoss {
  double mean_loss = 0.0;
  Matrix dy;  // dL/dY, same shape as Y
};

struct SparseLoss {
  double mean_loss = 0.0;
  std::vector<SparseRow> dy;  // same pattern as the SparseOutput
};

// Softmax cross entropy over all N classes. The sparse variant folds the
// inactive units into a closed-form tail term (N - |active|) * e^(c - m),
// so the distribution stays a true N-class softmax at O(1) extra cost.
// Requires each sample's label to be active; a sample with no active units
// contributes ln N (the uniform fallback) and no gradient entries.
DenseLoss softmax_xent_dense(const Matrix& y, std::span<const uint32_t> labels);
SparseLoss softmax_xent_sparse(const SparseOutput& out, std::span<const uint32_t> labels);

// N x K gradient with explicit rows only for units active in >= 1 sample.
struct RowSparseMatrix {
  std::vector<uint32_t> row_ids;  // ascending
  uint32_t cols = 0;
  std::vector<float> values;  // row_ids.size() x cols, row-major

  float* row(size_t slot) { return values.data() + slot * cols; }
  const float* row(size_t slot) const { return values.data() + slot * cols; }
};

struct DenseGrad {
  Matrix dw;  // N x K
  Matrix dx;  // M x K, empty when not requested
};

struct SparseGrad {
  RowSparseMatrix dw;
  Matrix dx;  // M x K, empty when not requested
};

// dW = dY^T X and dX = dY W. dW rows accumulate over samples in ascending
// order, dX rows over units in ascending order; the sparse variant uses the
// same axpy_f32 in the same order, so a full-active pattern reproduces the
// dense result bit for bit.
DenseGrad backward_dense(const Matrix& dy, const Matrix& x, const Matrix& w,
                         bool with_dx = true, unsigned threads = 1);
SparseGrad backward_sparse(std::span<const SparseRow> dy, const Matrix& x, const Matrix& w,
                           std::span<const ActiveSet> active, bool with_dx = false,
                           unsigned threads = 1);

// W_i -= lr * dW_i for exactly the rows present in the gradient; all other
// rows are untouched. lr must be positive.
void sgd_update(Matrix& w, const RowSparseMatrix& dw, float lr);
void sgd_update_dense(Matrix& w, const Matrix& dw, float lr);

// "WTAW" blob: magic, u32 version=1, u32 N, u32 K, then N*K float32
// little-endian row-major.
void save_weights(const Matrix& w, std::ostream& os);
Matrix load_weights(std::istream& is);
void save_weights_file(const Matrix& w, const std::string& path);
Matrix load_weights_file(const std::string& path);

}  // namespace wta
