#pragma once

// Test-only reference implementations. Everything here is deliberately
// naive and kept independent of the library's computation paths: double
// precision, straight loops, no shared kernels.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "wta/matrix.hpp"
#include "wta/rng.hpp"

namespace oracle {

inline double dot(const float* a, const float* b, size_t n) {
  double acc = 0.0;
  for (size_t k = 0; k < n; ++k) acc += static_cast<double>(a[k]) * b[k];
  return acc;
}

// Y = X * W^T by triple loop in double.
inline std::vector<double> matmul_xwt(const wta::Matrix& x, const wta::Matrix& w) {
  std::vector<double> y(static_cast<size_t>(x.rows) * w.rows, 0.0);
  for (uint32_t j = 0; j < x.rows; ++j)
    for (uint32_t i = 0; i < w.rows; ++i)
      for (uint32_t k = 0; k < x.cols; ++k)
        y[static_cast<size_t>(j) * w.rows + i] +=
            static_cast<double>(x.at(j, k)) * w.at(i, k);
  return y;
}

// Softmax cross entropy in double over all N classes, with the logits of
// one sample given sparsely (inactive units materialized at the default).
struct DenseSoftmaxResult {
  double loss = 0.0;
  std::vector<double> dlogits;  // over all N units
};

inline DenseSoftmaxResult softmax_xent_densified(std::span<const uint32_t> units,
                                                 std::span<const double> values,
                                                 double default_logit, uint32_t total_units,
                                                 uint32_t label) {
  std::vector<double> logits(total_units, default_logit);
  for (size_t u = 0; u < units.size(); ++u) logits[units[u]] = values[u];
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  DenseSoftmaxResult r;
  r.loss = -(logits[label] - m - std::log(z));
  r.dlogits.resize(total_units);
  for (uint32_t i = 0; i < total_units; ++i)
    r.dlogits[i] = std::exp(logits[i] - m) / z - (i == label ? 1.0 : 0.0);
  return r;
}

inline wta::Matrix random_matrix(uint32_t rows, uint32_t cols, uint64_t seed, float lo = -1.0f,
                                 float hi = 1.0f) {
  wta::Matrix m(rows, cols);
  wta::SplitMix64 rng(seed);
  for (float& v : m.data) v = lo + static_cast<float>(rng.next_double()) * (hi - lo);
  return m;
}

inline wta::Matrix gaussian_matrix(uint32_t rows, uint32_t cols, uint64_t seed) {
  wta::Matrix m(rows, cols);
  wta::SplitMix64 rng(seed);
  for (float& v : m.data) v = static_cast<float>(rng.next_gaussian());
  return m;
}

inline bool close_rel(double a, double b, double tol, double abs_floor = 1e-8) {
  double diff = std::abs(a - b);
  return diff <= tol * std::max(std::abs(a), std::abs(b)) || diff <= abs_floor;
}

}  // namespace oracle
