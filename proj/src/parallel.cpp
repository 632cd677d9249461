#include "scedft/parallel.hpp"

#include <atomic>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace scedft::par {

namespace {
std::atomic<int> g_threads{0};
}

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() { return g_threads.load(); }

bool parallel_enabled() {
#if defined(_OPENMP)
  return detail::effective_threads() != 1;
#else
  return false;
#endif
}

namespace detail {
int effective_threads() {
#if defined(_OPENMP)
  const int req = g_threads.load();
  if (req == 1) return 1;
  if (req > 1) return req;
  return omp_get_max_threads();
#else
  return 1;
#endif
}
}  // namespace detail

}  // namespace scedft::par
