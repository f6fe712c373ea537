#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace lfk {

// Monte Carlo ensembles are cut into fixed-size batches; batch b always uses
// substream (seed, b) and partial results are reduced in batch order, so the
// estimate does not depend on how batches are assigned to threads.
inline constexpr std::size_t kBatchSize = 2048;

inline unsigned thread_count() {
    if (const char* env = std::getenv("LFK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

// Runs fn(batch_index) for batch_index in [0, n_batches) on up to
// thread_count() workers.  fn must only write to per-batch slots.
template <typename Fn>
void for_each_batch(std::size_t n_batches, Fn&& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(), n_batches));
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_batches) return;
                fn(b);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace lfk
