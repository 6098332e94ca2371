#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dalab {

/// Runs fn(k) for k in [0, count) on up to `threads` workers. Callers write
/// results into pre-sized slots indexed by k, so output order never depends
/// on scheduling. The exception from the smallest failing k is rethrown.
template <class Fn>
void parallelFor(int count, int threads, Fn&& fn) {
    if (count <= 0) return;
    threads = std::clamp(threads, 1, count);
    if (threads == 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::mutex guard;
    int failedAt = count;
    std::exception_ptr failure;
    auto worker = [&] {
        for (int k = next++; k < count; k = next++) {
            try {
                fn(k);
            } catch (...) {
                std::lock_guard<std::mutex> lock(guard);
                if (k < failedAt) {
                    failedAt = k;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace dalab
