#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace ibridge {

/// Thread count from an explicit request, else `BRIDGE_THREADS`, else the
/// number of logical cores. Always at least 1.
std::size_t resolve_threads(std::optional<std::size_t> requested = std::nullopt);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to per-index slots; the first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body)
{
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(count);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(threads, count);
        pool.reserve(n);
        for (std::size_t t = 0; t < n; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace ibridge
