#include "compnerf/core/parallel.hpp"

#ifdef COMPNERF_HAVE_OPENMP
#include <omp.h>
#endif

namespace compnerf {

namespace {
int g_threads = 0;  // 0 = unset, use hardware default
}

void set_num_threads(int n) {
  g_threads = n < 1 ? 1 : n;
#ifdef COMPNERF_HAVE_OPENMP
  omp_set_num_threads(g_threads);
#endif
}

int num_threads() {
#ifdef COMPNERF_HAVE_OPENMP
  if (g_threads == 0) return omp_get_max_threads();
#endif
  return g_threads == 0 ? 1 : g_threads;
}

bool parallel_enabled() {
#ifdef COMPNERF_HAVE_OPENMP
  return num_threads() > 1;
#else
  return false;
#endif
}

}  // namespace compnerf
