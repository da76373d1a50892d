#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace torogrow {

inline unsigned thread_cap() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("TOROGROW_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < n) n = static_cast<unsigned>(v);
    }
    return n;
}

// Runs fn(begin, end, chunk_index) over [0, count) split into fixed chunks.
// The chunking (and therefore any per-chunk reduction the caller combines in
// chunk order) does not depend on the number of worker threads, so results
// are identical no matter how TOROGROW_THREADS is set.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t n_chunks, Fn&& fn) {
    if (count == 0) return;
    if (n_chunks == 0) n_chunks = 1;
    if (n_chunks > count) n_chunks = count;

    const unsigned workers = std::min<unsigned>(thread_cap(), static_cast<unsigned>(n_chunks));
    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = count * c / n_chunks;
        const std::size_t end = count * (c + 1) / n_chunks;
        fn(begin, end, c);
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= n_chunks) return;
                run_chunk(c);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace torogrow
