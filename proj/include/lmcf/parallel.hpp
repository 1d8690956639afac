#pragma once

// Deterministic data-parallel helpers. Every reduction splits the index range
// into fixed blocks of kBlock items, sums each block serially and then adds the
// block partials in block order, so the result is bitwise identical for any
// thread count (including the serial reference path).

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lmcf::par {

inline constexpr std::size_t kBlock = 256;

void set_threads(int n);
int threads();

template <class F>
double blocked_sum_serial(std::size_t n, F&& term) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    double total = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * kBlock, hi = lo + kBlock < n ? lo + kBlock : n;
        double partial = 0.0;
        for (std::size_t i = lo; i < hi; ++i) partial += term(i);
        total += partial;
    }
    return total;
}

template <class F>
double blocked_sum(std::size_t n, F&& term) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    if (nblocks < 2) return blocked_sum_serial(n, term);
    std::vector<double> partials(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
        double partial = 0.0;
        for (std::size_t i = lo; i < hi; ++i) partial += term(i);
        partials[static_cast<std::size_t>(b)] = partial;
    }
    double total = 0.0;
    for (double p : partials) total += p;
    return total;
}

/// Parallel map over [0, n); f must only write to index-owned output.
template <class F>
void for_each_index(std::size_t n, F&& f) {
#pragma omp parallel for schedule(static) if (n > 2 * kBlock)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) f(static_cast<std::size_t>(i));
}

} // namespace lmcf::par
