#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace terpscape {

namespace detail {
inline std::atomic<unsigned>& worker_count_ref() {
    static std::atomic<unsigned> n{1};
    return n;
}
inline thread_local bool inside_worker = false;
}  // namespace detail

inline void set_worker_count(unsigned n) { detail::worker_count_ref() = n == 0 ? 1 : n; }
inline unsigned worker_count() { return detail::worker_count_ref().load(); }

// Runs fn(i) for i in [0, n). Work units must be independent; callers are
// expected to write results into pre-sized slots so that aggregation order
// (and therefore output) is identical for any worker count. Nested calls run
// inline on the calling worker.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    unsigned workers = worker_count();
    if (workers <= 1 || n <= 1 || detail::inside_worker) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned threads = static_cast<unsigned>(std::min<size_t>(workers, n));
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto body = [&]() {
        detail::inside_worker = true;
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
        detail::inside_worker = false;
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace terpscape
