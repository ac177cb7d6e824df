#pragma once

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
#endif

namespace driftbench {

// Thread cap for all parallel regions. Honors DRIFTBENCH_THREADS when set
// (re-read on every call so tests can vary it within one process).
int max_threads();

} // namespace driftbench
