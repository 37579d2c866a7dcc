#include "wta/bench.hpp"

#include <algorithm>
#include <stdexcept>

#include "wta/rng.hpp"

namespace wta {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TrainConfig config_for(const BenchSpec& spec, TrainMode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.batch_size = spec.batch_size;
  cfg.learning_rate = spec.learning_rate;
  cfg.active_units = spec.active_units;
  cfg.wta.input_dim = spec.input_dim;
  cfg.wta.num_hashes = spec.num_hashes;
  cfg.wta.sections_per_hash = spec.sections_per_hash;
  cfg.wta.elems_per_section = spec.elems_per_section;
  cfg.wta.seed = spec.seed;
  cfg.rehash_period = 1;
  cfg.threads = spec.threads;
  return cfg;
}

PhaseMedians run_impl(const BenchSpec& spec, TrainMode mode) {
  if (spec.reps == 0) throw std::invalid_argument("bench: reps must be >= 1");

  SplitMix64 rng(mix_seed(spec.seed, 0xbe9c));
  Matrix x(spec.batch_size, spec.input_dim);
  for (float& v : x.data) v = static_cast<float>(rng.next_gaussian());
  std::vector<uint32_t> labels(spec.batch_size);
  for (uint32_t& l : labels) l = static_cast<uint32_t>(rng.next_below(spec.num_units));

  Matrix w = init_weights(spec.num_units, spec.input_dim, spec.seed);
  TrainConfig cfg = config_for(spec, mode);
  HashedTrainerState state;
  if (mode == TrainMode::hashed) state = make_hashed_state(cfg, spec.input_dim);

  std::array<std::vector<double>, kNumPhases> samples;
  std::vector<double> totals;
  for (uint32_t rep = 0; rep < spec.warmup + spec.reps; ++rep) {
    // rehash_period is 1, so every repetition includes a full index rebuild.
    BatchResult r = mode == TrainMode::dense ? train_batch_dense(w, x, labels, cfg)
                                             : train_batch_hashed(w, x, labels, cfg, state);
    if (rep < spec.warmup) continue;
    for (int p = 0; p < kNumPhases; ++p) samples[p].push_back(r.phase_s[p]);
    totals.push_back(r.total_s());
  }

  PhaseMedians out;
  out.impl = mode == TrainMode::dense ? "dense" : "hashed";
  for (int p = 0; p < kNumPhases; ++p) out.median_s[p] = median(samples[p]);
  out.total_median_s = median(totals);
  return out;
}

}  // namespace

std::vector<PhaseMedians> bench_phases(const BenchSpec& spec) {
  std::vector<PhaseMedians> out;
  out.push_back(run_impl(spec, TrainMode::dense));
  out.push_back(run_impl(spec, TrainMode::hashed));
  return out;
}

std::vector<LadderPoint> bench_ladder(const BenchSpec& spec, std::span<const uint32_t> n_list) {
  std::vector<LadderPoint> out;
  for (uint32_t n : n_list) {
    BenchSpec point = spec;
    point.num_units = n;
    for (const PhaseMedians& pm : bench_phases(point)) {
      LadderPoint lp;
      lp.num_units = n;
      lp.impl = pm.impl;
      lp.median_s = pm.total_median_s;
      lp.phase_median_s = pm.median_s;
      out.push_back(lp);
    }
  }
  return out;
}

}  // namespace wta
