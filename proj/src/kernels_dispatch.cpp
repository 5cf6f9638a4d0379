#include "mbt/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "mbt/parallel.hpp"

namespace mbt::vec {

#if defined(__x86_64__)
bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}
#endif

namespace {

const Kernels* pick(const std::string& name) {
  if (name == "scalar") return &scalar();
#if defined(__x86_64__)
  if (name == "avx2") {
    if (!cpu_has_avx2()) throw std::runtime_error("kernels: CPU has no AVX2");
    return &avx2();
  }
#endif
  throw std::runtime_error("kernels: unknown variant '" + name + "'");
}

const Kernels* auto_pick() {
  if (const char* env = std::getenv("MBT_KERNELS"); env && *env)
    return pick(env);
#if defined(__x86_64__)
  if (cpu_has_avx2()) return &avx2();
#endif
  return &scalar();
}

std::atomic<const Kernels*> g_active{nullptr};

}  // namespace

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (!k) {
    k = auto_pick();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void force_kernels(const std::string& name) {
  g_active.store(name.empty() ? auto_pick() : pick(name),
                 std::memory_order_release);
}

}  // namespace mbt::vec

namespace mbt {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) {
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  g_threads.store(n > 0 ? n : 1, std::memory_order_relaxed);
}

int threads() { return g_threads.load(std::memory_order_relaxed); }

}  // namespace mbt
