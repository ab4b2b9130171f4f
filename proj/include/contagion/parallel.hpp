#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace contagion {

/// Number of chunks parallel_chunks will use.
inline std::size_t chunk_count(std::size_t n, unsigned workers) {
    return std::max<std::size_t>(1, std::min<std::size_t>(workers, n / 1024 + 1));
}

/// Runs fn(chunk, begin, end) over contiguous chunks of [0, n). Callers
/// write disjoint ranges and merge per-chunk output in chunk order, so the
/// outcome never depends on scheduling or on the worker count.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
    const std::size_t w = chunk_count(n, workers);
    if (w == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w - 1);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t k = 1; k < w; ++k) {
        const std::size_t lo = std::min(n, k * chunk);
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&fn, k, lo, hi] { fn(k, lo, hi); });
    }
    fn(std::size_t{0}, std::size_t{0}, std::min(n, chunk));
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace contagion
