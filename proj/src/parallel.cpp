#include "chaoslab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "chaoslab/errors.hpp"

namespace chaoslab {

std::size_t thread_count() {
  if (const char* env = std::getenv("CHAOSLAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const std::size_t workers = std::min(thread_count(), n);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const ReplicaError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplicaError(failed_index, e.what());
    }
  }
}

void RunningStats::push(double x) noexcept {
  ++count;
  const double delta = x - mean;
  mean += delta / double(count);
  m2 += delta * (x - mean);
}

RunningStats RunningStats::merge(const RunningStats& a, const RunningStats& b) noexcept {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  RunningStats out;
  out.count = a.count + b.count;
  const double delta = b.mean - a.mean;
  const double nb = double(b.count) / double(out.count);
  out.mean = a.mean + delta * nb;
  out.m2 = a.m2 + b.m2 + delta * delta * double(a.count) * nb;
  return out;
}

namespace {

RunningStats reduce_range(std::span<const double> xs) {
  if (xs.size() == 1) {
    RunningStats s;
    s.push(xs[0]);
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return RunningStats::merge(reduce_range(xs.first(half)), reduce_range(xs.subspan(half)));
}

}  // namespace

RunningStats tree_reduce(std::span<const double> samples) {
  if (samples.empty()) return {};
  return reduce_range(samples);
}

}  // namespace chaoslab
