#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dashtrack {

/// Execution policy for the data-parallel kernels. Both policies compute each
/// output element with identical arithmetic, so results are bit-identical
/// regardless of policy or thread count; the serial path is the reference the
/// tests compare against.
enum class Exec { Serial, Parallel };

template <typename F>
inline void par_for(int n, Exec exec, F&& body) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
}

inline void set_thread_cap(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace dashtrack
