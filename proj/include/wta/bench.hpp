#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wta/trainer.hpp"

namespace wta {

// Sizes and repetition policy for the micro benchmarks. Each repetition is
// one real training step (random data, random labels, label forcing on),
// timed per phase; warmup repetitions are discarded and the median over the
// remaining ones is reported.
struct BenchSpec {
  uint32_t batch_size = 64;   // M
  uint32_t input_dim = 256;   // K
  uint32_t num_units = 4096;  // N
  uint32_t active_units = 32;
  uint32_t num_hashes = 256;
  uint32_t sections_per_hash = 3;
  uint32_t elems_per_section = 8;
  float learning_rate = 0.01f;
  uint32_t reps = 5;
  uint32_t warmup = 2;
  uint64_t seed = 42;
  unsigned threads = 1;
};

struct PhaseMedians {
  std::string impl;  // "dense" or "hashed"
  std::array<double, kNumPhases> median_s{};
  double total_median_s = 0.0;  // median of the per-repetition batch totals

  double forward_backward() const { return median_s[kForward] + median_s[kBackward]; }
};

// Times one dense and one hashed step at the spec's sizes.
std::vector<PhaseMedians> bench_phases(const BenchSpec& spec);

struct LadderPoint {
  uint32_t num_units = 0;
  std::string impl;
  double median_s = 0.0;  // median per-batch total (rehash included for hashed)
  std::array<double, kNumPhases> phase_median_s{};
};

// Repeats bench_phases over a list of output-layer sizes.
std::vector<LadderPoint> bench_ladder(const BenchSpec& spec, std::span<const uint32_t> n_list);

}  // namespace wta
