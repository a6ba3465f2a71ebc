#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prflow {

// Execution mode for the field kernels. Elementwise kernels produce bitwise
// identical results in both modes (each output element is computed by exactly
// one thread); reductions are always evaluated serially in index order.
enum class Exec { serial, openmp };

Exec default_exec();
void set_default_exec(Exec e);
int max_threads();

template <class F>
inline void par_for(Exec e, int n, F&& body) {
#ifdef _OPENMP
  if (e == Exec::openmp) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
#else
  (void)e;
#endif
  for (int i = 0; i < n; ++i) body(i);
}

template <class F>
inline void par_for(int n, F&& body) {
  par_for(default_exec(), n, body);
}

}  // namespace prflow
