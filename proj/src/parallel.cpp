#include "rlab/parallel.hpp"

#include <algorithm>

namespace rlab {

namespace {
std::atomic<int> g_threads{0};

int effective_threads() {
  const int t = g_threads.load();
  if (t > 0) return t;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }
int threads() { return effective_threads(); }

void parallel_for(Index n, const std::function<void(Index)>& fn) {
  const int nt = std::min<Index>(effective_threads(), std::max<Index>(n, 1));
  if (nt <= 1 || n < 64) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  const Index chunk = std::max<Index>(1, n / (8 * nt));
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const Index begin = next.fetch_add(chunk);
        if (begin >= n) return;
        const Index end = std::min(n, begin + chunk);
        for (Index i = begin; i < end; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

void parallel_chunks(Index n, const std::function<void(Index, Index)>& fn) {
  const int nt = std::min<Index>(effective_threads(), std::max<Index>(n, 1));
  if (nt <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const Index per = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const Index begin = std::min<Index>(n, t * per);
    const Index end = std::min<Index>(n, begin + per);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace rlab
