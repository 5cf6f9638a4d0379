#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace mbt {

// Process-wide worker count for the few parallel loops in tree fitting
// and row-stat evaluation. 0 selects hardware_concurrency. Results are
// independent of this setting: workers write to disjoint slots and all
// reductions happen sequentially afterwards.
void set_threads(int n);
int threads();

// Static partition of [0, n) over the active worker count.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  int nw = threads();
  if (nw <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  nw = std::min(nw, n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += nw) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mbt
