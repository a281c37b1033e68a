#pragma once

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nqs::parallel {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// Index-parallel loop. Each iteration must write only to its own slots so
// results are bit-identical for any thread count; exceptions are collected
// and the first one rethrown after the region ends.
template <class F>
void parallel_for(long n, F&& f) {
    std::exception_ptr err = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

}  // namespace nqs::parallel
