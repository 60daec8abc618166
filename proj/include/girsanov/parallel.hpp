#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace girsanov {

/// Compensated (Kahan) accumulator. Reductions over ensembles run in fixed
/// path order with compensation, so reported sums do not depend on worker
/// count.
class KahanSum {
public:
    void add(double x) noexcept {
        const double y = x - carry_;
        const double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const noexcept { return sum_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Run body(i) for i in [0, n) on `workers` threads, block-partitioned.
/// Each index is processed exactly once; the body must only write to its
/// own slot. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_for_index(std::size_t n, int workers, Body&& body) {
    if (n == 0) {
        return;
    }
    if (workers < 1) {
        workers = 1;
    }
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

}  // namespace girsanov
