#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace floquet {

// Resolve the worker count: explicit request (>0) wins, then the
// FLOQUET_SPECTRA_WORKERS environment variable, then hardware concurrency.
std::size_t resolve_workers(std::size_t requested);

// Run fn(i) for i in [0, n) on `workers` threads. Work is handed out through a
// shared atomic counter so the assignment of index -> thread is irrelevant to
// the result; callers own any per-index output slots. workers <= 1 runs
// serially on the calling thread. The first exception thrown by any fn(i) is
// rethrown on the caller after all threads join.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
    if (n == 0) return;
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (workers > n) workers = n;

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n, std::memory_order_relaxed);  // drain remaining work
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace floquet
