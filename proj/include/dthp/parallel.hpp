#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dthp {

// Runs body(i) for i in [0, count) across at most `workers` threads, contiguous
// index blocks per thread. Results must be written to per-index slots; no
// reduction happens here, so the outcome is independent of the worker count.
template <typename F>
void parallel_for(std::size_t count, unsigned workers, F&& body) {
    if (count == 0) return;
    const std::size_t usable =
        workers <= 1 ? 1 : std::min<std::size_t>(workers, count);
    if (usable == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(usable);
    const std::size_t chunk = (count + usable - 1) / usable;
    for (std::size_t w = 0; w < usable; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Worker count resolution: explicit flag > DTHP_WORKERS env > 1.
[[nodiscard]] inline unsigned resolve_workers(long flag_value) {
    if (flag_value > 0) return static_cast<unsigned>(flag_value);
    if (const char* env = std::getenv("DTHP_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

}  // namespace dthp
