#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mameshfree {

namespace detail {
inline int& thread_count_storage() {
    static int n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}
}  // namespace detail

inline void set_thread_count(int n) { detail::thread_count_storage() = std::max(1, n); }
inline int thread_count() { return detail::thread_count_storage(); }

/// Index-parallel loop with a static block partition. Each index is handled
/// by exactly one worker, so output slots are written once and the result is
/// independent of the thread count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&f, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Deterministic parallel sum: terms are accumulated in fixed-size blocks and
/// the block partials are reduced in index order, so the value is bitwise
/// reproducible for any thread count.
template <class G>
double parallel_sum(std::size_t n, G&& term) {
    constexpr std::size_t kBlock = 4096;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    });
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

}  // namespace mameshfree
