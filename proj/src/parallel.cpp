#include "mil/parallel.hpp"

#include <atomic>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mil::parallel {

namespace {
std::atomic<int> g_workers{0};  // 0 = uninitialized, use hardware default
}

int hardware_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void set_workers(int n) {
  if (n < 1) n = hardware_workers();
  g_workers.store(n, std::memory_order_relaxed);
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
}

int workers() {
  int n = g_workers.load(std::memory_order_relaxed);
  if (n == 0) {
    n = hardware_workers();
    g_workers.store(n, std::memory_order_relaxed);
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
  }
  return n;
}

bool enabled() { return workers() > 1; }

}  // namespace mil::parallel
