#include "wta/index.hpp"

#include <algorithm>
#include <stdexcept>

#include "wta/parallel.hpp"

namespace wta {

namespace {

// Total order used everywhere a top-A cut is made.
inline bool vote_order(const ActiveUnit& a, const ActiveUnit& b) {
  if (a.votes != b.votes) return a.votes > b.votes;
  return a.unit < b.unit;
}

// Sorted insertion into a best-first list capped at top_a. The top-A set
// under a total order is unique, so the result does not depend on the
// order candidates arrive in.
inline void insert_top_a(std::vector<ActiveUnit>& selected, ActiveUnit cand, uint32_t top_a) {
  if (selected.size() == top_a && !vote_order(cand, selected.back())) return;
  auto it = std::lower_bound(selected.begin(), selected.end(), cand, vote_order);
  selected.insert(it, cand);
  if (selected.size() > top_a) selected.pop_back();
}

// Appends forced units that missed the cut (flagging the ones present).
template <typename VotesOf>
void append_forced(std::vector<ActiveUnit>& selected, std::span<const uint32_t> forced,
                   VotesOf&& votes_of) {
  for (uint32_t f : forced) {
    bool present = false;
    for (ActiveUnit& u : selected) {
      if (u.unit == f) {
        u.forced = true;
        present = true;
        break;
      }
    }
    if (!present) selected.push_back(ActiveUnit{f, votes_of(f), true});
  }
}

}  // namespace

MultiHashIndex build_index(const Matrix& w, const PermutationSet& perms, unsigned threads) {
  if (w.cols != perms.config.input_dim)
    throw std::invalid_argument("build_index: weight columns do not match input_dim");
  const uint64_t codes_wide = perms.config.num_codes();
  // Dense bin arrays: one u32 offset per code per table.
  if (codes_wide * perms.config.num_hashes > (uint64_t{1} << 29))
    throw std::invalid_argument("build_index: code space too large for dense bin tables");

  const uint32_t num_codes = static_cast<uint32_t>(codes_wide);
  const uint32_t nq = perms.config.num_hashes;
  const uint32_t n = w.rows;

  std::vector<HashCode> codes = hash_matrix_by_hash(w, perms, threads);

  MultiHashIndex index;
  index.num_units = n;
  index.num_codes = num_codes;
  index.tables.resize(nq);

  parallel_for(nq, threads, [&](size_t q0, size_t q1) {
    std::vector<uint32_t> cursor(num_codes);
    for (size_t q = q0; q < q1; ++q) {
      const HashCode* __restrict table_codes = codes.data() + q * n;
      BinTable& table = index.tables[q];
      table.bin_start.assign(num_codes + 1, 0);
      table.unit_ids.resize(n);
      for (uint32_t i = 0; i < n; ++i) ++table.bin_start[table_codes[i] + 1];
      for (uint32_t c = 0; c < num_codes; ++c) table.bin_start[c + 1] += table.bin_start[c];
      // Scatter in ascending i, keeping every bin sorted.
      std::copy(table.bin_start.begin(), table.bin_start.end() - 1, cursor.begin());
      for (uint32_t i = 0; i < n; ++i) table.unit_ids[cursor[table_codes[i]]++] = i;
    }
  });
  return index;
}

VoteCounts query_votes(std::span<const HashCode> sample_codes, const MultiHashIndex& index) {
  if (sample_codes.size() != index.tables.size())
    throw std::invalid_argument("query_votes: expected one code per table");

  std::vector<uint32_t> counts(index.num_units, 0);
  std::vector<uint32_t> touched;
  for (size_t q = 0; q < sample_codes.size(); ++q) {
    HashCode code = sample_codes[q];
    if (code >= index.num_codes) throw std::invalid_argument("query_votes: code out of range");
    for (uint32_t unit : index.tables[q].bin(code)) {
      if (counts[unit]++ == 0) touched.push_back(unit);
    }
  }
  VoteCounts out;
  out.reserve(touched.size());
  std::sort(touched.begin(), touched.end());
  for (uint32_t unit : touched) out.emplace_back(unit, counts[unit]);
  return out;
}

ActiveSet select_active(const VoteCounts& votes, uint32_t top_a,
                        std::span<const uint32_t> forced) {
  if (top_a == 0) throw std::invalid_argument("select_active: top_a must be >= 1");
  ActiveSet out;
  out.units.reserve(std::min<size_t>(top_a + forced.size(), votes.size() + forced.size()));
  for (const auto& [unit, count] : votes)
    insert_top_a(out.units, ActiveUnit{unit, count, false}, top_a);
  append_forced(out.units, forced, [&](uint32_t f) -> uint32_t {
    for (const auto& [unit, count] : votes)
      if (unit == f) return count;
    return 0;
  });
  return out;
}

std::vector<ActiveSet> select_batch(std::span<const HashCode> code_matrix, uint32_t num_samples,
                                    const MultiHashIndex& index, uint32_t top_a,
                                    std::span<const uint32_t> forced_per_sample,
                                    unsigned threads) {
  const size_t nq = index.tables.size();
  if (code_matrix.size() != static_cast<size_t>(num_samples) * nq)
    throw std::invalid_argument("select_batch: code matrix shape mismatch");
  if (!forced_per_sample.empty() && forced_per_sample.size() != num_samples)
    throw std::invalid_argument("select_batch: expected one forced unit per sample");
  if (top_a == 0) throw std::invalid_argument("select_batch: top_a must be >= 1");
  for (uint32_t f : forced_per_sample)
    if (f >= index.num_units)
      throw std::invalid_argument("select_batch: forced unit out of range");
  for (HashCode code : code_matrix)
    if (code >= index.num_codes) throw std::invalid_argument("select_batch: code out of range");

  std::vector<ActiveSet> out(num_samples);
  parallel_for(num_samples, threads, [&](size_t j0, size_t j1) {
    std::vector<uint32_t> counts(index.num_units, 0);
    std::vector<uint32_t> touched;
    for (size_t j = j0; j < j1; ++j) {
      touched.clear();
      const HashCode* codes = code_matrix.data() + j * nq;
      for (size_t q = 0; q < nq; ++q) {
        for (uint32_t unit : index.tables[q].bin(codes[q])) {
          if (counts[unit]++ == 0) touched.push_back(unit);
        }
      }
      ActiveSet& set = out[j];
      set.units.reserve(top_a + 1);
      for (uint32_t unit : touched)
        insert_top_a(set.units, ActiveUnit{unit, counts[unit], false}, top_a);
      std::span<const uint32_t> forced =
          forced_per_sample.empty() ? std::span<const uint32_t>{}
                                    : forced_per_sample.subspan(j, 1);
      append_forced(set.units, forced, [&](uint32_t f) { return counts[f]; });
      for (uint32_t unit : touched) counts[unit] = 0;
    }
  });
  return out;
}

}  // namespace wta
