// parallel.hpp
// Minimal task-pool helper used to spread independent ensemble realizations
// across threads. Work items are claimed from an atomic counter, so the
// assignment of items to threads never affects results: every item derives
// its randomness from its own index, not from the executing thread.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spindrive {

/// Number of worker threads to use when the caller passes 0 ("auto").
inline int resolve_thread_count(int requested) {
    if (requested < 0) throw std::invalid_argument("thread count must be >= 0");
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n_tasks) on `threads` workers (0 = auto). The
/// first exception thrown by any task is rethrown on the calling thread
/// after all workers have drained. When more than one worker is active,
/// OpenMP parallelism inside each task is disabled so the two levels do not
/// oversubscribe the machine.
inline void parallel_for_tasks(std::int64_t n_tasks, int threads,
                               const std::function<void(std::int64_t)>& fn) {
    if (n_tasks <= 0) return;
    const int pool =
        static_cast<int>(std::min<std::int64_t>(resolve_thread_count(threads), n_tasks));
    if (pool <= 1) {
        for (std::int64_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&] {
#ifdef _OPENMP
        omp_set_num_threads(1);
#endif
        for (;;) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n_tasks) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) workers.emplace_back(worker);
    for (std::thread& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spindrive
