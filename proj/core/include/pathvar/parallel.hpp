#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pathvar {

/// Worker count used by Monte Carlo loops; defaults to 1.
[[nodiscard]] std::size_t thread_count() noexcept;
void set_thread_count(std::size_t threads) noexcept;

/// Runs body(i) for i in [0, count) on up to thread_count() workers using
/// contiguous static chunks. The first exception thrown by any worker is
/// rethrown on the calling thread after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Evaluates f(i) for every sample index into a vector indexed by i, so that
/// downstream reductions can run in ascending sample order.
template <class T, class F>
[[nodiscard]] std::vector<T> sample_map(std::size_t count, F&& f) {
    std::vector<T> out(count);
    parallel_for(count, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

}  // namespace pathvar
