#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace soc {

// threads == 1 selects the serial reference path; threads == 0 uses all
// hardware threads. Kernels must produce scheduling-independent results:
// each index owns its output slot and its own derived rng stream.
struct ExecPolicy {
  int threads = 1;

  static ExecPolicy serial() { return ExecPolicy{1}; }
  static ExecPolicy all() { return ExecPolicy{0}; }

  int resolved_threads() const {
#ifdef _OPENMP
    return threads <= 0 ? omp_get_max_threads() : threads;
#else
    return 1;
#endif
  }
};

template <typename F>
void for_each_index(std::size_t n, const ExecPolicy& policy, F&& fn) {
  const int threads = policy.resolved_threads();
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    fn(static_cast<std::size_t>(i));
  }
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace soc
