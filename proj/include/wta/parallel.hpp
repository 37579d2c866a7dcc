#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace wta {

// Runs f(begin, end) over a static partition of [0, n). threads <= 1 runs
// inline on the caller; threads == 0 means hardware concurrency. The
// partition depends only on (n, threads), so work that writes disjoint
// output ranges produces identical results at any thread count.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  if (n == 0) return;
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned t = threads == 0 ? hw : threads;
  t = static_cast<unsigned>(std::min<std::size_t>(t, n));
  if (t <= 1) {
    f(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + t - 1) / t;
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned i = 0; i < t; ++i) {
    const std::size_t b = std::size_t{i} * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace wta
