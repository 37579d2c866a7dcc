#include "wta/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "wta/parallel.hpp"
#include "wta/rng.hpp"

namespace wta {

const std::array<const char*, kNumPhases> kPhaseNames = {
    "rehash", "hash_inputs", "select", "forward", "loss", "backward", "update"};

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class PhaseTimer {
 public:
  explicit PhaseTimer(std::array<double, kNumPhases>& out) : out_(out) {}
  template <typename F>
  auto run(Phase phase, F&& f) {
    auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      out_[phase] += seconds_since(t0);
    } else {
      auto r = f();
      out_[phase] += seconds_since(t0);
      return r;
    }
  }

 private:
  std::array<double, kNumPhases>& out_;
};

void check_batch(const Matrix& x, std::span<const uint32_t> labels, uint32_t num_units) {
  if (x.rows == 0) throw std::invalid_argument("train batch: empty batch");
  if (labels.size() != x.rows)
    throw std::invalid_argument("train batch: expected one label per sample");
  for (uint32_t l : labels)
    if (l >= num_units) throw std::invalid_argument("train batch: label out of range");
}

}  // namespace

void PhaseTotals::add(const std::array<double, kNumPhases>& phase_s) {
  for (int p = 0; p < kNumPhases; ++p) {
    if (phase_s[p] > 0.0) {
      seconds[p] += phase_s[p];
      ++calls[p];
    }
  }
}

double BatchResult::total_s() const {
  double t = 0.0;
  for (double s : phase_s) t += s;
  return t;
}

void write_report_csv(const TrainReport& report, std::ostream& os) {
  os << "elapsed_s,epoch,batch,split,top1,loss\n";
  for (const EvalPoint& p : report.points) {
    char line[160];
    std::snprintf(line, sizeof(line), "%.6f,%u,%llu,%s,%.6f,%.6f\n", p.elapsed_s, p.epoch,
                  static_cast<unsigned long long>(p.batch), p.split.c_str(), p.top1,
                  p.mean_loss);
    os << line;
  }
}

void write_phases_csv(const PhaseTotals& totals, std::ostream& os) {
  os << "phase,total_s,calls\n";
  for (int p = 0; p < kNumPhases; ++p) {
    char line[96];
    std::snprintf(line, sizeof(line), "%s,%.6f,%llu\n", kPhaseNames[p], totals.seconds[p],
                  static_cast<unsigned long long>(totals.calls[p]));
    os << line;
  }
}

Matrix init_weights(uint32_t num_units, uint32_t input_dim, uint64_t seed) {
  Matrix w(num_units, input_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  SplitMix64 rng(mix_seed(seed, 0x1417));
  for (float& v : w.data)
    v = static_cast<float>((rng.next_double() * 2.0 - 1.0) * bound);
  return w;
}

void split_holdout(size_t total, double holdout_fraction, uint64_t seed,
                   std::vector<uint32_t>& train, std::vector<uint32_t>& holdout) {
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
    throw std::invalid_argument("split: holdout fraction must be in [0, 1)");
  std::vector<uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0u);
  SplitMix64 rng(mix_seed(seed, 0x5917));
  for (size_t i = total; i > 1; --i) {
    size_t j = rng.next_below(i);
    std::swap(order[i - 1], order[j]);
  }
  size_t holdout_count = static_cast<size_t>(holdout_fraction * total + 0.5);
  if (holdout_count >= total) holdout_count = total - 1;
  train.assign(order.begin(), order.end() - holdout_count);
  holdout.assign(order.end() - holdout_count, order.end());
}

BatchResult train_batch_dense(Matrix& w, const Matrix& x_batch, std::span<const uint32_t> labels,
                              const TrainConfig& cfg) {
  check_batch(x_batch, labels, w.rows);
  BatchResult result;
  PhaseTimer timer(result.phase_s);

  Matrix y = timer.run(kForward, [&] { return forward_dense(x_batch, w, cfg.threads); });
  DenseLoss loss = timer.run(kLoss, [&] { return softmax_xent_dense(y, labels); });
  result.loss = loss.mean_loss;
  DenseGrad grad = timer.run(
      kBackward, [&] { return backward_dense(loss.dy, x_batch, w, cfg.compute_dx, cfg.threads); });
  if (cfg.learning_rate > 0.0f)
    timer.run(kUpdate, [&] { sgd_update_dense(w, grad.dw, cfg.learning_rate); });
  return result;
}

HashedTrainerState make_hashed_state(const TrainConfig& cfg, uint32_t input_dim) {
  WtaConfig wta = cfg.wta;
  wta.input_dim = input_dim;
  HashedTrainerState state;
  state.perms = gen_permutations(wta);
  return state;
}

BatchResult train_batch_hashed(Matrix& w, const Matrix& x_batch,
                               std::span<const uint32_t> labels, const TrainConfig& cfg,
                               HashedTrainerState& state) {
  check_batch(x_batch, labels, w.rows);
  if (cfg.rehash_period == 0)
    throw std::invalid_argument("train batch: rehash_period must be >= 1");
  if (cfg.active_units == 0 || cfg.active_units > w.rows)
    throw std::invalid_argument("train batch: active_units must be in [1, N]");

  BatchResult result;
  PhaseTimer timer(result.phase_s);

  if (state.batches_seen % cfg.rehash_period == 0) {
    timer.run(kRehash, [&] { state.index = build_index(w, state.perms, cfg.threads); });
  }
  ++state.batches_seen;

  std::vector<HashCode> codes =
      timer.run(kHashInputs, [&] { return hash_matrix(x_batch, state.perms, cfg.threads); });

  std::span<const uint32_t> forced =
      cfg.label_force ? labels : std::span<const uint32_t>{};
  std::vector<ActiveSet> active = timer.run(kSelect, [&] {
    return select_batch(codes, x_batch.rows, state.index, cfg.active_units, forced, cfg.threads);
  });

  SparseOutput out = timer.run(kForward, [&] {
    return forward_sparse(x_batch, w, active, cfg.default_logit, cfg.threads);
  });
  SparseLoss loss = timer.run(kLoss, [&] { return softmax_xent_sparse(out, labels); });
  result.loss = loss.mean_loss;

  SparseGrad grad = timer.run(kBackward, [&] {
    return backward_sparse(loss.dy, x_batch, w, active, cfg.compute_dx, cfg.threads);
  });
  if (cfg.learning_rate > 0.0f)
    timer.run(kUpdate, [&] { sgd_update(w, grad.dw, cfg.learning_rate); });
  return result;
}

namespace {

void gather_batch(const Dataset& data, std::span<const uint32_t> ids, Matrix& x,
                  std::vector<uint32_t>& labels) {
  x.rows = static_cast<uint32_t>(ids.size());
  x.cols = data.features.cols;
  x.data.resize(static_cast<size_t>(x.rows) * x.cols);
  labels.resize(ids.size());
  for (size_t j = 0; j < ids.size(); ++j) {
    const float* src = data.features.row(ids[j]);
    std::copy(src, src + x.cols, x.row(static_cast<uint32_t>(j)));
    labels[j] = data.labels[ids[j]];
  }
}

}  // namespace

TrainReport fit(const Dataset& data, const TrainConfig& cfg, Matrix& w_out) {
  data.validate();
  if (cfg.batch_size == 0 || cfg.batch_size > data.features.rows)
    throw std::invalid_argument("fit: batch_size must be in [1, dataset size]");

  const uint32_t n = data.num_classes;
  const uint32_t k = data.features.cols;
  Matrix w = init_weights(n, k, cfg.init_seed);

  std::vector<uint32_t> train_ids, holdout_ids;
  split_holdout(data.features.rows, cfg.holdout_fraction, cfg.shuffle_seed, train_ids,
                holdout_ids);
  // With no holdout rows, score on the training split instead.
  const std::vector<uint32_t>& eval_ids = holdout_ids.empty() ? train_ids : holdout_ids;
  Matrix eval_x;
  std::vector<uint32_t> eval_labels;
  gather_batch(data, eval_ids, eval_x, eval_labels);

  HashedTrainerState state;
  if (cfg.mode == TrainMode::hashed) state = make_hashed_state(cfg, k);

  TrainReport report;
  double elapsed = 0.0;
  uint64_t global_batch = 0;
  double loss_accum = 0.0;
  uint64_t loss_batches = 0;

  auto evaluate = [&](uint32_t epoch) {
    EvalPoint p;
    p.elapsed_s = elapsed;
    p.epoch = epoch;
    p.batch = global_batch;
    p.split = holdout_ids.empty() ? "train" : "holdout";
    p.top1 = evaluate_top1_dense(w, eval_x, eval_labels, cfg.threads);
    p.mean_loss = loss_batches == 0 ? std::nan("") : loss_accum / loss_batches;
    loss_accum = 0.0;
    loss_batches = 0;
    report.points.push_back(p);
  };

  evaluate(0);

  Matrix x_batch;
  std::vector<uint32_t> batch_labels;
  std::vector<uint32_t> order = train_ids;
  for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    SplitMix64 rng(mix_seed(cfg.shuffle_seed, epoch));
    for (size_t i = order.size(); i > 1; --i) {
      size_t j = rng.next_below(i);
      std::swap(order[i - 1], order[j]);
    }
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t count = std::min<size_t>(cfg.batch_size, order.size() - start);
      gather_batch(data, std::span<const uint32_t>(order).subspan(start, count), x_batch,
                   batch_labels);
      BatchResult r = cfg.mode == TrainMode::dense
                          ? train_batch_dense(w, x_batch, batch_labels, cfg)
                          : train_batch_hashed(w, x_batch, batch_labels, cfg, state);
      elapsed += r.total_s();
      report.phases.add(r.phase_s);
      loss_accum += r.loss;
      ++loss_batches;
      ++global_batch;
      if (cfg.eval_every != 0 && global_batch % cfg.eval_every == 0 &&
          !(start + count >= order.size()))
        evaluate(epoch);
    }
    evaluate(epoch);
  }

  report.final_top1 = report.points.back().top1;
  w_out = std::move(w);
  return report;
}

double evaluate_top1_dense(const Matrix& w, const Matrix& x, std::span<const uint32_t> labels,
                           unsigned threads) {
  if (labels.size() != x.rows)
    throw std::invalid_argument("evaluate: expected one label per sample");
  if (x.cols != w.cols) throw std::invalid_argument("evaluate: dimension mismatch");
  if (x.rows == 0) throw std::invalid_argument("evaluate: empty evaluation set");

  std::vector<uint32_t> hits_per_chunk;
  std::vector<uint8_t> hit(x.rows, 0);
  parallel_for(x.rows, threads, [&](size_t j0, size_t j1) {
    for (size_t j = j0; j < j1; ++j) {
      const float* xj = x.row(static_cast<uint32_t>(j));
      float best = dot_f32(w.row(0), xj, w.cols);
      uint32_t best_unit = 0;
      for (uint32_t i = 1; i < w.rows; ++i) {
        float v = dot_f32(w.row(i), xj, w.cols);
        if (v > best) {  // ties keep the lowest unit id
          best = v;
          best_unit = i;
        }
      }
      hit[j] = best_unit == labels[j] ? 1 : 0;
    }
  });
  size_t correct = 0;
  for (uint8_t h : hit) correct += h;
  return static_cast<double>(correct) / x.rows;
}

HashedEvalResult evaluate_top1_hashed(const Matrix& w, const Matrix& x,
                                      std::span<const uint32_t> labels,
                                      const PermutationSet& perms, const MultiHashIndex& index,
                                      uint32_t top_a, unsigned threads) {
  if (labels.size() != x.rows)
    throw std::invalid_argument("evaluate: expected one label per sample");
  if (x.cols != w.cols) throw std::invalid_argument("evaluate: dimension mismatch");
  if (x.rows == 0) throw std::invalid_argument("evaluate: empty evaluation set");
  if (index.num_units != w.rows) throw std::invalid_argument("evaluate: index/W mismatch");

  auto t0 = Clock::now();
  std::vector<HashCode> codes = hash_matrix(x, perms, threads);
  std::vector<ActiveSet> active = select_batch(codes, x.rows, index, top_a, {}, threads);

  std::vector<uint8_t> hit(x.rows, 0);
  parallel_for(x.rows, threads, [&](size_t j0, size_t j1) {
    for (size_t j = j0; j < j1; ++j) {
      const auto& units = active[j].units;
      if (units.empty()) continue;  // no candidates: counted as an error
      const float* xj = x.row(static_cast<uint32_t>(j));
      float best = 0.0f;
      uint32_t best_unit = 0;
      bool first = true;
      for (const ActiveUnit& u : units) {
        float v = dot_f32(w.row(u.unit), xj, w.cols);
        if (first || v > best || (v == best && u.unit < best_unit)) {
          best = v;
          best_unit = u.unit;
          first = false;
        }
      }
      hit[j] = best_unit == labels[j] ? 1 : 0;
    }
  });
  HashedEvalResult result;
  result.forward_s = seconds_since(t0);
  size_t correct = 0;
  for (uint8_t h : hit) correct += h;
  result.top1 = static_cast<double>(correct) / x.rows;
  return result;
}

std::vector<SweepRow> sweep_eval(const Matrix& w, const Matrix& x,
                                 std::span<const uint32_t> labels,
                                 std::span<const uint32_t> a_list,
                                 std::span<const uint32_t> q_list, const WtaConfig& base,
                                 unsigned threads) {
  std::vector<SweepRow> rows;
  rows.reserve(a_list.size() * q_list.size());
  for (uint32_t q : q_list) {
    WtaConfig cfg = base;
    cfg.input_dim = w.cols;
    cfg.num_hashes = q;
    PermutationSet perms = gen_permutations(cfg);
    MultiHashIndex index = build_index(w, perms, threads);
    for (uint32_t a : a_list) {
      HashedEvalResult r = evaluate_top1_hashed(w, x, labels, perms, index, a, threads);
      rows.push_back(SweepRow{a, q, r.top1, r.forward_s});
    }
  }
  return rows;
}

}  // namespace wta
