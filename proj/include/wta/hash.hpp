#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wta/matrix.hpp"

namespace wta {

using HashCode = uint32_t;

// Hyperparameters of the winner-take-all hash family. Each of the
// `num_hashes` hashes is built from `sections_per_hash` sections; a section
// looks at the first `elems_per_section` entries of its own seeded
// permutation of the input coordinates and records the position of the
// largest one. The positions concatenate into a base-`elems_per_section`
// integer, section 0 least significant.
struct WtaConfig {
  uint32_t input_dim = 0;          // K
  uint32_t num_hashes = 256;       // Q
  uint32_t sections_per_hash = 3;  // N_s
  uint32_t elems_per_section = 8;  // N_e

  uint64_t seed = 0;

  // elems_per_section ^ sections_per_hash; every code is in [0, num_codes).
  uint64_t num_codes() const;

  // Throws std::invalid_argument naming the violated bound.
  void validate() const;
};

// The truncated permutations behind one WtaConfig. Only the first
// elems_per_section entries of each permutation are ever consulted, so only
// those are stored: indices[(q * N_s + s) * N_e + p] is the input
// coordinate sitting at position p of section s of hash q. Immutable after
// creation and safe to share across threads.
struct PermutationSet {
  WtaConfig config;
  std::vector<uint32_t> indices;

  const uint32_t* section(uint32_t q, uint32_t s) const {
    return indices.data() +
           (static_cast<size_t>(q) * config.sections_per_hash + s) * config.elems_per_section;
  }

  // Checks size, index range and per-section distinctness; throws
  // std::invalid_argument.
  void validate() const;
};

// Draws each section as a uniform sample of N_e distinct coordinates from
// [0, K) via a truncated Fisher-Yates shuffle driven by SplitMix64 seeded
// from (cfg.seed, q, s). Sections are generated independently, so the same
// seed with a larger num_hashes yields a superset whose Q-prefix is
// identical.
PermutationSet gen_permutations(const WtaConfig& cfg);

// One hash of one vector. Ties on a section's maximum resolve to the
// lowest section position, so hashing is total on vectors with repeated
// values. The code is invariant under any strictly increasing elementwise
// transform of x.
HashCode hash_vector(std::span<const float> x, const PermutationSet& perms, uint32_t q);

// All Q hashes of one vector.
std::vector<HashCode> hash_vector_all(std::span<const float> x, const PermutationSet& perms);

// Row-wise hashes of a batch: out[j * Q + q] == hash_vector(row j, q).
// Internally blocked and transposed so the compiler can vectorize across
// rows; comparison-for-comparison it performs exactly the same float
// comparisons as hash_vector, so results are identical, and rows are
// partitioned statically so results do not depend on thread count.
std::vector<HashCode> hash_matrix(const Matrix& X, const PermutationSet& perms,
                                  unsigned threads = 1);

// The same hashes laid out hash-major, out[q * rows + j]: one contiguous
// run per hash, which is what index building consumes.
std::vector<HashCode> hash_matrix_by_hash(const Matrix& X, const PermutationSet& perms,
                                          unsigned threads = 1);

// "WTAP" blob: magic, u32 version=1, u32 K, u32 Q, u32 N_s, u32 N_e,
// u64 seed, then Q*N_s*N_e u32 little-endian coordinates.
void save_permutations(const PermutationSet& perms, std::ostream& os);
PermutationSet load_permutations(std::istream& is);
void save_permutations_file(const PermutationSet& perms, const std::string& path);
PermutationSet load_permutations_file(const std::string& path);

}  // namespace wta
