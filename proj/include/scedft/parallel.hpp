#pragma once

#include <cstddef>
#include <vector>

namespace scedft::par {

// Global thread count: 0 = use OpenMP default, 1 = force the serial
// reference path, n > 1 = request n threads. The parallel kernels are
// written so that their results are bitwise identical to the serial
// reference for any thread count (independent work per slot, or fixed-size
// block reductions combined in block order).
void set_threads(int n);
int threads();
bool parallel_enabled();

// Run fn(i) for i in [0, n). Results must be written to disjoint slots.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn);

// Deterministic blocked reduction: splits [0, n) into fixed-size blocks,
// evaluates per_block(lo, hi) in parallel, combines the per-block results
// serially in block order. Block size is independent of the thread count,
// so the result does not depend on scheduling.
template <class T, class PerBlock, class Combine>
T blocked_reduce(std::size_t n, std::size_t block_size, T init, PerBlock&& per_block, Combine&& combine);

}  // namespace scedft::par

// ---- implementation ----

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace scedft::par {

namespace detail {
int effective_threads();
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#if defined(_OPENMP)
  const int nt = detail::effective_threads();
  if (nt != 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

template <class T, class PerBlock, class Combine>
T blocked_reduce(std::size_t n, std::size_t block_size, T init, PerBlock&& per_block, Combine&& combine) {
  if (n == 0) return init;
  if (block_size == 0) block_size = 1;
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  std::vector<T> partial(nblocks, init);
  parallel_for(nblocks, [&](std::size_t b) {
    const std::size_t lo = b * block_size;
    const std::size_t hi = lo + block_size < n ? lo + block_size : n;
    partial[b] = per_block(lo, hi);
  });
  T acc = init;
  for (std::size_t b = 0; b < nblocks; ++b) acc = combine(acc, partial[b]);
  return acc;
}

}  // namespace scedft::par
