#pragma once
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sgmc {
namespace detail {

/// Worker count: SGMC_THREADS when set to a positive integer, else the hardware concurrency.
inline unsigned worker_count()
{
    if (const char* env = std::getenv("SGMC_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * Calls fn(i) for i in [0, count) on up to worker_count() threads.
 * Iterations are split into contiguous blocks; fn must only write to
 * slot i of shared output. The first exception is rethrown.
 */
template <class Fn>
void parallel_for(size_t count, Fn&& fn)
{
    const size_t workers = std::min<size_t>(worker_count(), std::max<size_t>(count, 1));
    if (workers <= 1 || count < 2) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const size_t block = (count + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t begin = w * block;
        const size_t end = std::min(count, begin + block);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace detail
} // namespace sgmc
