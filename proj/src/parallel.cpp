#include "rmglab/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rmglab {

namespace {

std::atomic<int> g_cap{0}; // 0 = no in-process override

int env_cap() {
    static const int cached = [] {
        const char* v = std::getenv("RMGLAB_THREADS");
        if (!v) return 0;
        int parsed = std::atoi(v);
        return parsed > 0 ? parsed : 0;
    }();
    return cached;
}

} // namespace

int thread_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    if (int e = env_cap(); e > 0 && e < n) n = e;
    if (int c = g_cap.load(); c > 0 && c < n) n = c;
    return n > 0 ? n : 1;
}

void set_thread_cap(int cap) { g_cap.store(cap > 0 ? cap : 0); }

} // namespace rmglab
