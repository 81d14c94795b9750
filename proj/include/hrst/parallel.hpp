#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hrst {

/// Worker count from the HRST_JOBS environment variable, else 1.
unsigned default_jobs();

/// Calls f(i) for every i in [0, n) on up to `jobs` threads. Indices are
/// handed out dynamically; f must only write state owned by index i. The
/// first exception thrown by any call is rethrown after all workers join.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    jobs = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace hrst
