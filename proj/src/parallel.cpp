#include "prflow/parallel.hpp"

namespace prflow {

namespace {
Exec g_default = Exec::serial;
}

Exec default_exec() { return g_default; }
void set_default_exec(Exec e) { g_default = e; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace prflow
