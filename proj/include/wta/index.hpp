#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wta/hash.hpp"
#include "wta/matrix.hpp"

namespace wta {

// One hash's partition of the unit ids, stored as a flat CSR over a dense
// array of num_codes bins. Bins hold unit ids in ascending order.
struct BinTable {
  std::vector<uint32_t> bin_start;  // num_codes + 1 offsets into unit_ids
  std::vector<uint32_t> unit_ids;   // exactly num_units entries

  std::span<const uint32_t> bin(HashCode code) const {
    return {unit_ids.data() + bin_start[code], unit_ids.data() + bin_start[code + 1]};
  }
};

// Q bin tables over the rows of a weight matrix. Rebuilt whenever the
// weights change; immutable and shareable once built.
struct MultiHashIndex {
  std::vector<BinTable> tables;
  uint32_t num_units = 0;
  uint32_t num_codes = 0;
};

// Hashes every weight row under every hash and bins it: unit i lands in
// table q's bin hash_vector(W_i, q). O(N*Q) hash evaluations.
MultiHashIndex build_index(const Matrix& w, const PermutationSet& perms, unsigned threads = 1);

// (unit, votes) pairs in ascending unit order; zero-vote units are absent.
using VoteCounts = std::vector<std::pair<uint32_t, uint32_t>>;

// votes[i] = number of tables whose queried bin contains unit i.
VoteCounts query_votes(std::span<const HashCode> sample_codes, const MultiHashIndex& index);

struct ActiveUnit {
  uint32_t unit = 0;
  uint32_t votes = 0;
  bool forced = false;
};

// Per-sample selection result: at most A top-voted units ordered by
// descending votes (ties to the ascending unit id), followed by any forced
// units that did not make the cut. No duplicates, no padding when fewer
// than A units received votes.
struct ActiveSet {
  std::vector<ActiveUnit> units;

  bool contains(uint32_t unit) const {
    for (const ActiveUnit& u : units)
      if (u.unit == unit) return true;
    return false;
  }
};

ActiveSet select_active(const VoteCounts& votes, uint32_t top_a,
                        std::span<const uint32_t> forced);

// Per-row query_votes + select_active over an M x Q code matrix.
// forced_per_sample is either empty or holds one forced unit per sample
// (the training label). Samples are partitioned statically, so the result
// is identical at any thread count.
std::vector<ActiveSet> select_batch(std::span<const HashCode> code_matrix, uint32_t num_samples,
                                    const MultiHashIndex& index, uint32_t top_a,
                                    std::span<const uint32_t> forced_per_sample,
                                    unsigned threads = 1);

}  // namespace wta
