#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wta/dataset.hpp"
#include "wta/hash.hpp"
#include "wta/index.hpp"
#include "wta/layer.hpp"
#include "wta/matrix.hpp"

namespace wta {

enum class TrainMode { dense, hashed };

enum Phase : int {
  kRehash = 0,
  kHashInputs,
  kSelect,
  kForward,
  kLoss,
  kBackward,
  kUpdate,
  kNumPhases,
};

extern const std::array<const char*, kNumPhases> kPhaseNames;

struct TrainConfig {
  TrainMode mode = TrainMode::hashed;
  uint32_t batch_size = 64;
  float learning_rate = 0.1f;  // 0 runs evaluation-style batches, no updates
  uint32_t epochs = 5;
  uint32_t active_units = 16;  // A
  WtaConfig wta;               // input_dim is taken from the data
  float default_logit = 0.0f;
  bool label_force = true;
  bool compute_dx = false;     // single layer: nothing upstream to feed
  uint32_t rehash_period = 1;  // batches per index rebuild
  uint64_t shuffle_seed = 42;
  uint64_t init_seed = 1;
  double holdout_fraction = 0.1;
  uint32_t eval_every = 0;  // extra evaluations every this many batches; 0 = epoch ends only
  unsigned threads = 1;
};

struct PhaseTotals {
  std::array<double, kNumPhases> seconds{};
  std::array<uint64_t, kNumPhases> calls{};

  void add(const std::array<double, kNumPhases>& phase_s);
};

struct BatchResult {
  double loss = 0.0;
  std::array<double, kNumPhases> phase_s{};

  double total_s() const;
};

struct EvalPoint {
  double elapsed_s = 0.0;  // cumulative training time, evaluation excluded
  uint32_t epoch = 0;
  uint64_t batch = 0;  // global batch counter
  std::string split;
  double top1 = 0.0;
  double mean_loss = 0.0;  // mean training loss since the previous point
};

struct TrainReport {
  std::vector<EvalPoint> points;
  PhaseTotals phases;
  double final_top1 = 0.0;
};

// CSV with header "elapsed_s,epoch,batch,split,top1,loss".
void write_report_csv(const TrainReport& report, std::ostream& os);
// CSV with header "phase,total_s,calls", one row per phase.
void write_phases_csv(const PhaseTotals& totals, std::ostream& os);

// Zero-mean uniform init in [-1/sqrt(K), +1/sqrt(K)], seeded.
Matrix init_weights(uint32_t num_units, uint32_t input_dim, uint64_t seed);

// Seeded shuffle of [0, total); the first (1 - holdout_fraction) share is
// the training split, the rest the holdout.
void split_holdout(size_t total, double holdout_fraction, uint64_t seed,
                   std::vector<uint32_t>& train, std::vector<uint32_t>& holdout);

// One dense SGD step: forward, softmax cross entropy, backward, update.
BatchResult train_batch_dense(Matrix& w, const Matrix& x_batch, std::span<const uint32_t> labels,
                              const TrainConfig& cfg);

// Per-run state of the hashed trainer: the permutation set is fixed, the
// index is rebuilt from the current weights every rehash_period batches.
struct HashedTrainerState {
  PermutationSet perms;
  MultiHashIndex index;
  uint64_t batches_seen = 0;
};

HashedTrainerState make_hashed_state(const TrainConfig& cfg, uint32_t input_dim);

// One hashed SGD step: (rehash if due) -> hash inputs -> vote/select (label
// forced when configured) -> sparse forward -> sparse softmax -> sparse
// backward -> row-sparse update.
BatchResult train_batch_hashed(Matrix& w, const Matrix& x_batch,
                               std::span<const uint32_t> labels, const TrainConfig& cfg,
                               HashedTrainerState& state);

// Full training run with seeded shuffling and periodic holdout evaluation
// (always dense, so dense and hashed runs are scored the same way).
TrainReport fit(const Dataset& data, const TrainConfig& cfg, Matrix& w_out);

// Dense: argmax over all N logits, ties to the lowest unit id.
double evaluate_top1_dense(const Matrix& w, const Matrix& x, std::span<const uint32_t> labels,
                           unsigned threads = 1);

struct HashedEvalResult {
  double top1 = 0.0;
  double forward_s = 0.0;  // hash + select + partial logits + argmax
};

// Hashed: argmax over the active-set logits only, no label forcing;
// samples with an empty active set count as errors.
HashedEvalResult evaluate_top1_hashed(const Matrix& w, const Matrix& x,
                                      std::span<const uint32_t> labels,
                                      const PermutationSet& perms, const MultiHashIndex& index,
                                      uint32_t top_a, unsigned threads = 1);

struct SweepRow {
  uint32_t active_units = 0;
  uint32_t num_hashes = 0;
  double top1 = 0.0;
  double forward_s = 0.0;
};

// For each Q: regenerate permutations (same seed, so smaller Q is a prefix)
// and rebuild the index once; then evaluate every A.
std::vector<SweepRow> sweep_eval(const Matrix& w, const Matrix& x,
                                 std::span<const uint32_t> labels,
                                 std::span<const uint32_t> a_list,
                                 std::span<const uint32_t> q_list, const WtaConfig& base,
                                 unsigned threads = 1);

}  // namespace wta
