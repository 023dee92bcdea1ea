#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace kinex {

inline long block_count(long n, long block_size) {
    return block_size > 0 ? (n + block_size - 1) / block_size : 0;
}

// Runs work(block_index, lo, hi) over every block of the fixed partition of
// [0, n) into block_size-sized pieces. Blocks are claimed dynamically by up to
// `threads` workers, but the partition depends only on (n, block_size):
// callers that write per-block outputs and combine them in block order get
// results independent of the worker count and of scheduling.
inline void for_blocks(long n, long block_size, int threads,
                       const std::function<void(long, long, long)>& work) {
    const long nb = block_count(n, block_size);
    if (nb <= 0) return;
    const int workers = static_cast<int>(
        std::min<long>(std::max(threads, 1), nb));
    if (workers == 1) {
        for (long b = 0; b < nb; ++b) {
            const long lo = b * block_size;
            work(b, lo, std::min(lo + block_size, n));
        }
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long b = next.fetch_add(1);
                if (b >= nb) return;
                const long lo = b * block_size;
                work(b, lo, std::min(lo + block_size, n));
            }
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace kinex
