#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace somflow {

/// Worker cap: SOMFLOW_THREADS if set, else hardware concurrency.
inline std::size_t thread_budget() {
    if (const char* env = std::getenv("SOMFLOW_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<std::size_t>(n);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

/// Run fn(begin, end, chunk_index) over [0, n) split into fixed-size chunks.
/// Chunk boundaries depend only on n and chunk_size, never on the worker
/// count, so any per-chunk outputs can be reduced in chunk order for
/// bit-reproducible results.
inline void parallel_chunks(std::size_t n, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    const std::size_t workers = std::min(thread_budget(), n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
}

/// Number of chunks parallel_chunks will produce, for sizing output slots.
inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
    return (n + chunk_size - 1) / chunk_size;
}

}  // namespace somflow
