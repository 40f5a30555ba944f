#ifndef ORPCO_PARALLEL_HPP
#define ORPCO_PARALLEL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace orpco {

/// Runs fn(0..n-1) on up to max_threads workers (0 = hardware concurrency).
/// Work items must be independent; the first exception is rethrown after all
/// workers join. Results must not depend on scheduling, so callers seed any
/// randomness per item.
inline void parallel_for(int n, std::function<void(int)> fn, int max_threads = 0) {
    if (n <= 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    int workers = max_threads > 0 ? max_threads : static_cast<int>(hw ? hw : 1);
    if (workers > n) workers = n;
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace orpco

#endif
