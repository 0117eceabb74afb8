#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lessketch {

/// Runs `compute(replica)` for replica = 0..count-1 on up to `jobs` threads
/// and feeds the results to `fold(replica, result)` strictly in replica
/// order, so any reduction is bitwise independent of scheduling.
template <class Compute, class Fold>
void for_each_replica(std::size_t count, unsigned jobs, Compute&& compute, Fold&& fold) {
  using Result = decltype(compute(std::size_t{0}));
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    for (std::size_t r = 0; r < count; ++r) fold(r, compute(r));
    return;
  }
  const std::size_t chunk = std::max<std::size_t>(256, 16 * static_cast<std::size_t>(jobs));
  std::vector<Result> results;
  for (std::size_t begin = 0; begin < count; begin += chunk) {
    const std::size_t end = std::min(count, begin + chunk);
    results.assign(end - begin, Result{});
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> workers;
      for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (std::size_t r = begin + w; r < end; r += jobs) results[r - begin] = compute(r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::size_t r = begin; r < end; ++r) fold(r, std::move(results[r - begin]));
  }
}

}  // namespace lessketch
