#include "ecm/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ecm {

namespace {
std::atomic<int> g_cap{0};
}

int thread_count() {
  int cap = g_cap.load(std::memory_order_relaxed);
  if (cap <= 0) {
    if (const char* env = std::getenv("ECM_THREADS")) {
      cap = std::atoi(env);
    }
  }
#ifdef _OPENMP
  const int hw = omp_get_max_threads();
#else
  const int hw = 1;
#endif
  return cap > 0 ? (cap < hw ? cap : hw) : hw;
}

void set_thread_cap(int n) { g_cap.store(n, std::memory_order_relaxed); }

}  // namespace ecm
