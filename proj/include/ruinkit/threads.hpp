#ifndef RUINKIT_THREADS_HPP
#define RUINKIT_THREADS_HPP

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ruinkit {

// Parallelism cap: RUINKIT_THREADS when set, hardware concurrency otherwise.
inline int thread_count() {
  if (const char* env = std::getenv("RUINKIT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(chunk_index, begin, end) over [0, total) split into fixed chunks.
// The chunking depends only on `total` and the thread cap, and callers merge
// per-chunk results in chunk order, so results do not depend on scheduling.
template <typename Fn>
void parallel_chunks(long long total, Fn&& fn) {
  int threads = thread_count();
  if (threads <= 1 || total < 2) {
    fn(0, 0ll, total);
    return;
  }
  long long n_chunks = std::min<long long>(threads, total);
  long long per = (total + n_chunks - 1) / n_chunks;
  std::vector<std::thread> pool;
  for (long long c = 0; c < n_chunks; ++c) {
    long long begin = c * per;
    long long end = std::min(total, begin + per);
    if (begin >= end) break;
    pool.emplace_back([&fn, c, begin, end] { fn(static_cast<int>(c), begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ruinkit

#endif
