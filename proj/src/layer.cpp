#include "wta/layer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "wta/io.hpp"
#include "wta/parallel.hpp"

namespace wta {

namespace {
thread_local uint64_t t_mac_count = 0;
}

uint64_t mac_count() noexcept { return t_mac_count; }
void reset_mac_count() noexcept { t_mac_count = 0; }

[[gnu::noinline]] float dot_f32(const float* a, const float* b, size_t n) noexcept {
  t_mac_count += n;
  float acc = 0.0f;
  for (size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

[[gnu::noinline]] void axpy_f32(float* y, float a, const float* x, size_t n) noexcept {
  for (size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

Matrix forward_dense(const Matrix& x, const Matrix& w, unsigned threads) {
  if (x.cols != w.cols) throw std::invalid_argument("forward_dense: inner dimensions disagree");
  Matrix y(x.rows, w.rows);
  parallel_for(x.rows, threads, [&](size_t j0, size_t j1) {
    for (size_t j = j0; j < j1; ++j) {
      const float* xj = x.row(static_cast<uint32_t>(j));
      float* yj = y.row(static_cast<uint32_t>(j));
      for (uint32_t i = 0; i < w.rows; ++i) yj[i] = dot_f32(w.row(i), xj, w.cols);
    }
  });
  return y;
}

SparseOutput forward_sparse(const Matrix& x, const Matrix& w,
                            std::span<const ActiveSet> active, float default_logit,
                            unsigned threads) {
  if (x.cols != w.cols) throw std::invalid_argument("forward_sparse: inner dimensions disagree");
  if (active.size() != x.rows)
    throw std::invalid_argument("forward_sparse: expected one active set per sample");
  for (const ActiveSet& set : active)
    for (const ActiveUnit& u : set.units)
      if (u.unit >= w.rows) throw std::invalid_argument("forward_sparse: unit id out of range");

  SparseOutput out;
  out.default_logit = default_logit;
  out.total_units = w.rows;
  out.rows.resize(x.rows);
  parallel_for(x.rows, threads, [&](size_t j0, size_t j1) {
    for (size_t j = j0; j < j1; ++j) {
      const float* xj = x.row(static_cast<uint32_t>(j));
      SparseRow& row = out.rows[j];
      const auto& units = active[j].units;
      row.units.reserve(units.size());
      row.values.reserve(units.size());
      for (const ActiveUnit& u : units) {
        row.units.push_back(u.unit);
        row.values.push_back(dot_f32(w.row(u.unit), xj, w.cols));
      }
    }
  });
  return out;
}

DenseLoss softmax_xent_dense(const Matrix& y, std::span<const uint32_t> labels) {
  if (labels.size() != y.rows)
    throw std::invalid_argument("softmax_xent_dense: expected one label per sample");
  if (y.rows == 0 || y.cols == 0) throw std::invalid_argument("softmax_xent_dense: empty batch");
  const uint32_t n = y.cols;
  const uint32_t m = y.rows;
  DenseLoss out;
  out.dy = Matrix(m, n);
  double loss_sum = 0.0;
  for (uint32_t j = 0; j < m; ++j) {
    if (labels[j] >= n) throw std::invalid_argument("softmax_xent_dense: label out of range");
    const float* yj = y.row(j);
    float max_logit = yj[0];
    for (uint32_t i = 1; i < n; ++i) max_logit = std::max(max_logit, yj[i]);
    double z = 0.0;
    for (uint32_t i = 0; i < n; ++i) z += std::exp(static_cast<double>(yj[i]) - max_logit);
    loss_sum += -(static_cast<double>(yj[labels[j]]) - max_logit - std::log(z));
    float* dyj = out.dy.row(j);
    for (uint32_t i = 0; i < n; ++i) {
      double p = std::exp(static_cast<double>(yj[i]) - max_logit) / z;
      dyj[i] = static_cast<float>((p - (i == labels[j] ? 1.0 : 0.0)) / m);
    }
  }
  out.mean_loss = loss_sum / m;
  return out;
}

SparseLoss softmax_xent_sparse(const SparseOutput& out, std::span<const uint32_t> labels) {
  if (labels.size() != out.rows.size())
    throw std::invalid_argument("softmax_xent_sparse: expected one label per sample");
  if (out.rows.empty() || out.total_units == 0)
    throw std::invalid_argument("softmax_xent_sparse: empty batch");
  const uint32_t n = out.total_units;
  const size_t m = out.rows.size();
  const double c = out.default_logit;

  SparseLoss loss;
  loss.dy.resize(m);
  double loss_sum = 0.0;
  for (size_t j = 0; j < m; ++j) {
    const SparseRow& row = out.rows[j];
    if (row.units.empty()) {
      // No information about this sample: uniform over all N classes.
      loss_sum += std::log(static_cast<double>(n));
      continue;
    }
    size_t label_pos = row.units.size();
    float max_logit = out.default_logit;
    for (size_t u = 0; u < row.units.size(); ++u) {
      max_logit = std::max(max_logit, row.values[u]);
      if (row.units[u] == labels[j]) label_pos = u;
    }
    if (label_pos == row.units.size())
      throw std::logic_error("softmax_xent_sparse: label unit is not active (trainer bug)");

    const double shift = max_logit;
    double z = 0.0;
    for (float v : row.values) z += std::exp(static_cast<double>(v) - shift);
    z += static_cast<double>(n - row.units.size()) * std::exp(c - shift);

    loss_sum += -(static_cast<double>(row.values[label_pos]) - shift - std::log(z));
    SparseRow& dy = loss.dy[j];
    dy.units = row.units;
    dy.values.resize(row.values.size());
    for (size_t u = 0; u < row.values.size(); ++u) {
      double p = std::exp(static_cast<double>(row.values[u]) - shift) / z;
      dy.values[u] = static_cast<float>((p - (u == label_pos ? 1.0 : 0.0)) / m);
    }
  }
  loss.mean_loss = loss_sum / static_cast<double>(m);
  return loss;
}

DenseGrad backward_dense(const Matrix& dy, const Matrix& x, const Matrix& w, bool with_dx,
                         unsigned threads) {
  if (dy.rows != x.rows) throw std::invalid_argument("backward_dense: dY/X row mismatch");
  if (dy.cols != w.rows) throw std::invalid_argument("backward_dense: dY/W shape mismatch");
  if (x.cols != w.cols) throw std::invalid_argument("backward_dense: X/W column mismatch");

  DenseGrad grad;
  grad.dw = Matrix(w.rows, w.cols);
  parallel_for(w.rows, threads, [&](size_t i0, size_t i1) {
    for (size_t i = i0; i < i1; ++i) {
      float* dwi = grad.dw.row(static_cast<uint32_t>(i));
      for (uint32_t j = 0; j < x.rows; ++j) axpy_f32(dwi, dy.at(j, static_cast<uint32_t>(i)), x.row(j), x.cols);
    }
  });
  if (with_dx) {
    grad.dx = Matrix(x.rows, x.cols);
    parallel_for(x.rows, threads, [&](size_t j0, size_t j1) {
      for (size_t j = j0; j < j1; ++j) {
        float* dxj = grad.dx.row(static_cast<uint32_t>(j));
        const float* dyj = dy.row(static_cast<uint32_t>(j));
        for (uint32_t i = 0; i < w.rows; ++i) axpy_f32(dxj, dyj[i], w.row(i), w.cols);
      }
    });
  }
  return grad;
}

SparseGrad backward_sparse(std::span<const SparseRow> dy, const Matrix& x, const Matrix& w,
                           std::span<const ActiveSet> active, bool with_dx, unsigned threads) {
  if (dy.size() != x.rows)
    throw std::invalid_argument("backward_sparse: expected one gradient row per sample");
  if (active.size() != x.rows)
    throw std::invalid_argument("backward_sparse: expected one active set per sample");
  if (x.cols != w.cols) throw std::invalid_argument("backward_sparse: X/W column mismatch");
  for (size_t j = 0; j < dy.size(); ++j) {
    const SparseRow& row = dy[j];
    if (row.units.size() != row.values.size() || row.units.size() != active[j].units.size())
      throw std::invalid_argument("backward_sparse: gradient pattern mismatch");
    for (size_t u = 0; u < row.units.size(); ++u) {
      if (row.units[u] != active[j].units[u].unit)
        throw std::invalid_argument("backward_sparse: gradient pattern mismatch");
      if (row.units[u] >= w.rows)
        throw std::invalid_argument("backward_sparse: unit id out of range");
    }
  }

  SparseGrad grad;
  grad.dw.cols = w.cols;
  std::vector<uint32_t> union_rows;
  for (const SparseRow& row : dy) union_rows.insert(union_rows.end(), row.units.begin(), row.units.end());
  std::sort(union_rows.begin(), union_rows.end());
  union_rows.erase(std::unique(union_rows.begin(), union_rows.end()), union_rows.end());
  grad.dw.row_ids = union_rows;
  grad.dw.values.assign(union_rows.size() * static_cast<size_t>(w.cols), 0.0f);

  std::vector<int64_t> slot_of(w.rows, -1);
  for (size_t s = 0; s < union_rows.size(); ++s) slot_of[union_rows[s]] = static_cast<int64_t>(s);

  // Samples in ascending order, matching the dense accumulation order per
  // weight row.
  for (uint32_t j = 0; j < x.rows; ++j) {
    const SparseRow& row = dy[j];
    for (size_t u = 0; u < row.units.size(); ++u) {
      float* dwi = grad.dw.row(static_cast<size_t>(slot_of[row.units[u]]));
      axpy_f32(dwi, row.values[u], x.row(j), x.cols);
    }
  }

  if (with_dx) {
    grad.dx = Matrix(x.rows, x.cols);
    parallel_for(x.rows, threads, [&](size_t j0, size_t j1) {
      std::vector<size_t> order;
      for (size_t j = j0; j < j1; ++j) {
        const SparseRow& row = dy[j];
        order.resize(row.units.size());
        for (size_t u = 0; u < order.size(); ++u) order[u] = u;
        // Units in ascending order, matching the dense accumulation order.
        std::sort(order.begin(), order.end(),
                  [&row](size_t a, size_t b) { return row.units[a] < row.units[b]; });
        float* dxj = grad.dx.row(static_cast<uint32_t>(j));
        for (size_t u : order) axpy_f32(dxj, row.values[u], w.row(row.units[u]), w.cols);
      }
    });
  }
  return grad;
}

void sgd_update(Matrix& w, const RowSparseMatrix& dw, float lr) {
  if (!(lr > 0.0f)) throw std::invalid_argument("sgd_update: learning rate must be positive");
  if (dw.cols != w.cols && !dw.row_ids.empty())
    throw std::invalid_argument("sgd_update: column mismatch");
  for (uint32_t i : dw.row_ids)
    if (i >= w.rows) throw std::invalid_argument("sgd_update: row id out of range");
  for (size_t s = 0; s < dw.row_ids.size(); ++s)
    axpy_f32(w.row(dw.row_ids[s]), -lr, dw.row(s), w.cols);
}

void sgd_update_dense(Matrix& w, const Matrix& dw, float lr) {
  if (!(lr > 0.0f)) throw std::invalid_argument("sgd_update: learning rate must be positive");
  if (dw.rows != w.rows || dw.cols != w.cols)
    throw std::invalid_argument("sgd_update: shape mismatch");
  for (uint32_t i = 0; i < w.rows; ++i) axpy_f32(w.row(i), -lr, dw.row(i), w.cols);
}

void save_weights(const Matrix& w, std::ostream& os) {
  io::write_magic(os, "WTAW");
  io::write_u32(os, 1);
  io::write_u32(os, w.rows);
  io::write_u32(os, w.cols);
  for (float v : w.data) io::write_f32(os, v);
  if (!os) throw std::runtime_error("WTAW: write failed");
}

Matrix load_weights(std::istream& is) {
  io::expect_magic(is, "WTAW", "WTAW");
  io::expect_version(is, 1, "WTAW");
  uint32_t rows = io::read_u32(is, "WTAW");
  uint32_t cols = io::read_u32(is, "WTAW");
  Matrix w(rows, cols);
  for (size_t i = 0; i < w.data.size(); ++i) {
    float v = io::read_f32(is, "WTAW");
    if (!std::isfinite(v)) throw std::runtime_error("WTAW: non-finite weight");
    w.data[i] = v;
  }
  return w;
}

void save_weights_file(const Matrix& w, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("WTAW: cannot open " + path + " for writing");
  save_weights(w, os);
}

Matrix load_weights_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("WTAW: cannot open " + path);
  return load_weights(is);
}

}  // namespace wta
