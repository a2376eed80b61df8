#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ttr {

// Worker count: TTR_THREADS caps the pool, otherwise hardware concurrency.
inline int thread_budget() {
  if (const char* env = std::getenv("TTR_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on `chunk`, never on the thread count, so
// callers can reduce per-chunk results in chunk order and get identical
// bits at any parallelism level.
template <class Fn>
void parallel_chunks(std::int64_t n, std::int64_t chunk, Fn&& fn) {
  if (n <= 0) return;
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  const int nthreads =
      static_cast<int>(std::min<std::int64_t>(thread_budget(), nchunks));
  if (nthreads <= 1) {
    for (std::int64_t c = 0; c < nchunks; ++c)
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

}  // namespace ttr
