#pragma once

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tieconv {

/// Number of worker threads for internal parallelism. Controlled by the
/// TIECONV_THREADS environment variable (0 or unset = hardware concurrency).
inline int thread_count() {
    static const int cached = [] {
        if (const char* env = std::getenv("TIECONV_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) return v;
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? static_cast<int>(hc) : 1;
    }();
    return cached;
}

/// Run fn(begin, end) over contiguous chunks of [0, n). The chunk layout
/// depends only on n and thread_count(), so per-chunk results can be merged
/// in chunk order for deterministic reductions.
template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
    if (n == 0) return;
    const std::size_t workers = static_cast<std::size_t>(thread_count());
    if (workers <= 1 || n < 2 * workers) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace tieconv
