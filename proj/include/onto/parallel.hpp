#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace onto {

// Runs fn(i) for i in [0, n). threads <= 1 gives the plain serial loop,
// which is also the deterministic reference path used by the tests.
template <class F>
void parallel_for(size_t n, int threads, F&& fn) {
#ifdef _OPENMP
  if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(dynamic, 8)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<size_t>(i));
    }
    return;
  }
#endif
  (void)threads;
  for (size_t i = 0; i < n; ++i) fn(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace onto
