#include "driftbench/threads.hpp"

#include <cstdlib>

namespace driftbench {

int max_threads() {
    if (const char* env = std::getenv("DRIFTBENCH_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    int n = omp_get_max_threads();
    return n < 1 ? 1 : n;
}

} // namespace driftbench
