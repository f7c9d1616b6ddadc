#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace collapse {

/// Worker count for a request; <= 0 means one per hardware thread.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Splits [0, rows) into contiguous blocks and calls body(worker, lo, hi) for
/// each on its own thread. Runs inline when one worker suffices.
template <class Body>
void parallel_rows(int rows, int threads, Body&& body) {
  threads = std::max(1, std::min(threads, rows));
  if (threads == 1) {
    body(0, 0, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(rows) * w / threads);
    const int hi = static_cast<int>(static_cast<long long>(rows) * (w + 1) / threads);
    pool.emplace_back([&body, w, lo, hi] { body(w, lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace collapse
