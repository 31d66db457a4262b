#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace specmap {

/// Resolves a user-facing worker count: 0 means "all hardware threads".
inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Splits [0, rows) into contiguous bands and runs fn(begin, end) for each band
/// on its own thread. Every row is visited exactly once, so per-row pure work
/// gives results independent of the worker count. The first exception thrown
/// by any band is rethrown on the calling thread.
template <class Fn>
void parallel_rows(std::size_t rows, unsigned workers, Fn&& fn) {
    const std::size_t n = std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(rows, 1));
    if (n <= 1) {
        fn(std::size_t{0}, rows);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(n);
    const std::size_t chunk = rows / n;
    const std::size_t extra = rows % n;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t end = begin + chunk + (i < extra ? 1 : 0);
        threads.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace specmap
