#ifndef MXMSE_CORE_PARALLEL_HPP
#define MXMSE_CORE_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mxmse {

/// Worker count: request > 0 wins, then MXMSE_THREADS, then hardware.
int resolve_threads(int requested);

/// Runs fn(task_index) for every index in [0, task_count). Tasks may run on
/// any thread; callers make results deterministic by writing to per-index
/// slots and combining them in index order.
template <typename F>
void parallel_for(std::size_t task_count, int threads, F&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || task_count <= 1) {
        for (std::size_t i = 0; i < task_count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= task_count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(threads), task_count);
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace mxmse

#endif
