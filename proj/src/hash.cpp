#include "wta/hash.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "wta/io.hpp"
#include "wta/parallel.hpp"
#include "wta/rng.hpp"

namespace wta {

uint64_t WtaConfig::num_codes() const {
  uint64_t n = 1;
  for (uint32_t s = 0; s < sections_per_hash; ++s) {
    n *= elems_per_section;
    if (n > (uint64_t{1} << 32)) return n;  // caller validates
  }
  return n;
}

void WtaConfig::validate() const {
  if (input_dim == 0) throw std::invalid_argument("wta config: input_dim must be positive");
  if (num_hashes == 0) throw std::invalid_argument("wta config: num_hashes must be >= 1");
  if (sections_per_hash == 0)
    throw std::invalid_argument("wta config: sections_per_hash must be >= 1");
  if (elems_per_section < 2)
    throw std::invalid_argument("wta config: elems_per_section must be >= 2");
  if (elems_per_section > input_dim)
    throw std::invalid_argument("wta config: elems_per_section exceeds input_dim");
  if (num_codes() > (uint64_t{1} << 32))
    throw std::invalid_argument(
        "wta config: elems_per_section^sections_per_hash exceeds the 32-bit code space");
}

void PermutationSet::validate() const {
  config.validate();
  const uint32_t ns = config.sections_per_hash;
  const uint32_t ne = config.elems_per_section;
  const size_t expect = static_cast<size_t>(config.num_hashes) * ns * ne;
  if (indices.size() != expect)
    throw std::invalid_argument("permutation set: wrong number of indices");
  std::vector<bool> seen(config.input_dim);
  for (uint32_t q = 0; q < config.num_hashes; ++q) {
    for (uint32_t s = 0; s < ns; ++s) {
      const uint32_t* sec = section(q, s);
      std::fill(seen.begin(), seen.end(), false);
      for (uint32_t p = 0; p < ne; ++p) {
        if (sec[p] >= config.input_dim)
          throw std::invalid_argument("permutation set: index out of range");
        if (seen[sec[p]])
          throw std::invalid_argument("permutation set: duplicate index within a section");
        seen[sec[p]] = true;
      }
    }
  }
}

PermutationSet gen_permutations(const WtaConfig& cfg) {
  cfg.validate();
  const uint32_t k = cfg.input_dim;
  const uint32_t ns = cfg.sections_per_hash;
  const uint32_t ne = cfg.elems_per_section;

  PermutationSet out;
  out.config = cfg;
  out.indices.resize(static_cast<size_t>(cfg.num_hashes) * ns * ne);

  std::vector<uint32_t> pool(k);
  for (uint32_t q = 0; q < cfg.num_hashes; ++q) {
    for (uint32_t s = 0; s < ns; ++s) {
      SplitMix64 rng(mix_seed(mix_seed(cfg.seed, q), s));
      std::iota(pool.begin(), pool.end(), 0u);
      uint32_t* sec = out.indices.data() + (static_cast<size_t>(q) * ns + s) * ne;
      // Truncated Fisher-Yates: only the first N_e draws are needed.
      for (uint32_t p = 0; p < ne; ++p) {
        uint32_t j = p + static_cast<uint32_t>(rng.next_below(k - p));
        std::swap(pool[p], pool[j]);
        sec[p] = pool[p];
      }
    }
  }
  return out;
}

HashCode hash_vector(std::span<const float> x, const PermutationSet& perms, uint32_t q) {
  const WtaConfig& cfg = perms.config;
  if (x.size() != cfg.input_dim)
    throw std::invalid_argument("hash_vector: vector length does not match input_dim");
  if (q >= cfg.num_hashes) throw std::invalid_argument("hash_vector: hash index out of range");

  const uint32_t ne = cfg.elems_per_section;
  HashCode code = 0;
  uint32_t digit_scale = 1;
  for (uint32_t s = 0; s < cfg.sections_per_hash; ++s) {
    const uint32_t* sec = perms.section(q, s);
    float best = x[sec[0]];
    uint32_t pos = 0;
    for (uint32_t p = 1; p < ne; ++p) {
      float v = x[sec[p]];
      if (v > best) {  // ties keep the lowest position
        best = v;
        pos = p;
      }
    }
    code += pos * digit_scale;
    digit_scale *= ne;
  }
  return code;
}

std::vector<HashCode> hash_vector_all(std::span<const float> x, const PermutationSet& perms) {
  std::vector<HashCode> out(perms.config.num_hashes);
  for (uint32_t q = 0; q < perms.config.num_hashes; ++q) out[q] = hash_vector(x, perms, q);
  return out;
}

namespace {

constexpr uint32_t kHashBlockRows = 128;

// Hashes rows [row0, row0 + nrows) of X. The block is transposed so each
// section reads N_e contiguous runs, which lets the max/argmax loop
// vectorize across rows. Comparisons are the same strict > used by
// hash_vector, in the same order, so selected positions are identical.
// hash_major_rows == 0 writes out[row * Q + q]; otherwise out[q *
// hash_major_rows + row].
void hash_rows_block(const Matrix& x, size_t row0, size_t nrows, const PermutationSet& perms,
                     std::vector<float>& transposed, std::vector<float>& best_buf,
                     std::vector<uint32_t>& pos_buf, HashCode* out, size_t hash_major_rows) {
  const WtaConfig& cfg = perms.config;
  const uint32_t k = cfg.input_dim;
  const uint32_t ne = cfg.elems_per_section;
  const uint32_t nq = cfg.num_hashes;

  for (size_t r = 0; r < nrows; ++r) {
    const float* src = x.row(static_cast<uint32_t>(row0 + r));
    for (uint32_t c = 0; c < k; ++c) transposed[static_cast<size_t>(c) * nrows + r] = src[c];
  }

  float* __restrict best = best_buf.data();
  uint32_t* __restrict pos = pos_buf.data();
  for (uint32_t q = 0; q < nq; ++q) {
    HashCode* __restrict codes =
        hash_major_rows ? out + static_cast<size_t>(q) * hash_major_rows + row0 : nullptr;
    uint32_t digit_scale = 1;
    for (uint32_t s = 0; s < cfg.sections_per_hash; ++s) {
      const uint32_t* sec = perms.section(q, s);
      const float* __restrict first = transposed.data() + static_cast<size_t>(sec[0]) * nrows;
      for (size_t r = 0; r < nrows; ++r) {
        best[r] = first[r];
        pos[r] = 0;
      }
      for (uint32_t p = 1; p < ne; ++p) {
        const float* __restrict row = transposed.data() + static_cast<size_t>(sec[p]) * nrows;
        for (size_t r = 0; r < nrows; ++r) {
          bool gt = row[r] > best[r];
          best[r] = gt ? row[r] : best[r];
          pos[r] = gt ? p : pos[r];
        }
      }
      if (s == 0) {
        if (codes) {
          for (size_t r = 0; r < nrows; ++r) codes[r] = pos[r];
        } else {
          for (size_t r = 0; r < nrows; ++r) out[(row0 + r) * nq + q] = pos[r];
        }
      } else if (codes) {
        for (size_t r = 0; r < nrows; ++r) codes[r] += pos[r] * digit_scale;
      } else {
        for (size_t r = 0; r < nrows; ++r) out[(row0 + r) * nq + q] += pos[r] * digit_scale;
      }
      digit_scale *= ne;
    }
  }
}

std::vector<HashCode> hash_matrix_impl(const Matrix& x, const PermutationSet& perms,
                                       unsigned threads, bool hash_major) {
  const WtaConfig& cfg = perms.config;
  if (x.cols != cfg.input_dim)
    throw std::invalid_argument("hash_matrix: column count does not match input_dim");

  std::vector<HashCode> out(static_cast<size_t>(x.rows) * cfg.num_hashes);
  const size_t nblocks = (x.rows + kHashBlockRows - 1) / kHashBlockRows;
  parallel_for(nblocks, threads, [&](size_t b0, size_t b1) {
    std::vector<float> transposed(static_cast<size_t>(cfg.input_dim) * kHashBlockRows);
    std::vector<float> best(kHashBlockRows);
    std::vector<uint32_t> pos(kHashBlockRows);
    for (size_t b = b0; b < b1; ++b) {
      const size_t row0 = b * kHashBlockRows;
      const size_t nrows = std::min<size_t>(kHashBlockRows, x.rows - row0);
      hash_rows_block(x, row0, nrows, perms, transposed, best, pos, out.data(),
                      hash_major ? x.rows : 0);
    }
  });
  return out;
}

}  // namespace

std::vector<HashCode> hash_matrix(const Matrix& x, const PermutationSet& perms,
                                  unsigned threads) {
  return hash_matrix_impl(x, perms, threads, false);
}

std::vector<HashCode> hash_matrix_by_hash(const Matrix& x, const PermutationSet& perms,
                                          unsigned threads) {
  return hash_matrix_impl(x, perms, threads, true);
}

void save_permutations(const PermutationSet& perms, std::ostream& os) {
  io::write_magic(os, "WTAP");
  io::write_u32(os, 1);
  io::write_u32(os, perms.config.input_dim);
  io::write_u32(os, perms.config.num_hashes);
  io::write_u32(os, perms.config.sections_per_hash);
  io::write_u32(os, perms.config.elems_per_section);
  io::write_u64(os, perms.config.seed);
  for (uint32_t v : perms.indices) io::write_u32(os, v);
  if (!os) throw std::runtime_error("WTAP: write failed");
}

PermutationSet load_permutations(std::istream& is) {
  io::expect_magic(is, "WTAP", "WTAP");
  io::expect_version(is, 1, "WTAP");
  PermutationSet out;
  out.config.input_dim = io::read_u32(is, "WTAP");
  out.config.num_hashes = io::read_u32(is, "WTAP");
  out.config.sections_per_hash = io::read_u32(is, "WTAP");
  out.config.elems_per_section = io::read_u32(is, "WTAP");
  out.config.seed = io::read_u64(is, "WTAP");
  const size_t n = static_cast<size_t>(out.config.num_hashes) * out.config.sections_per_hash *
                   out.config.elems_per_section;
  out.indices.resize(n);
  for (size_t i = 0; i < n; ++i) out.indices[i] = io::read_u32(is, "WTAP");
  out.validate();
  return out;
}

void save_permutations_file(const PermutationSet& perms, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("WTAP: cannot open " + path + " for writing");
  save_permutations(perms, os);
}

PermutationSet load_permutations_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("WTAP: cannot open " + path);
  return load_permutations(is);
}

}  // namespace wta
