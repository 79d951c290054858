#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chaoslab {

/// Worker count: CHAOSLAB_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
/// is handled exactly once; the first exception (lowest index) is rethrown
/// wrapped in ReplicaError.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

/// Mean and centered second moment, mergeable (Chan et al. pairwise update).
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) noexcept;
  static RunningStats merge(const RunningStats& a, const RunningStats& b) noexcept;

  double variance() const noexcept { return count > 1 ? m2 / double(count - 1) : 0.0; }
  double stderr_of_mean() const noexcept {
    return count > 1 ? std::sqrt(variance() / double(count)) : 0.0;
  }
};

/// Deterministic pairwise (arity 2) tree reduction of per-replica samples.
/// The result depends only on the sample order, never on thread count.
RunningStats tree_reduce(std::span<const double> samples);

}  // namespace chaoslab
