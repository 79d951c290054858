#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "chaoslab/errors.hpp"
#include "chaoslab/parallel.hpp"

using namespace chaoslab;

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  parallel_for(0, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("replica failures name the lowest failing index") {
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error("boom");
    });
    FAIL("expected an exception");
  } catch (const ReplicaError& e) {
    CHECK(e.replica() == 17);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}

TEST_CASE("tree reduction matches the two-pass statistics") {
  std::vector<double> x(1237);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(double(i) * 0.37) * 3.0 + 1.0;
  const RunningStats s = tree_reduce(x);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  CHECK(s.count == x.size());
  CHECK(s.mean == doctest::Approx(mean).epsilon(1e-13));
  CHECK(s.variance() == doctest::Approx(ss / double(x.size() - 1)).epsilon(1e-12));
  CHECK(s.stderr_of_mean() == doctest::Approx(std::sqrt(ss / double(x.size() - 1) / double(x.size()))));
}

TEST_CASE("results do not depend on the worker count") {
  auto compute = [] {
    const auto v = parallel_map<double>(333, [](std::size_t i) { return std::exp(-double(i) / 50.0); });
    return tree_reduce(v);
  };
  setenv("CHAOSLAB_THREADS", "1", 1);
  CHECK(thread_count() == 1);
  const RunningStats one = compute();
  setenv("CHAOSLAB_THREADS", "7", 1);
  CHECK(thread_count() == 7);
  const RunningStats seven = compute();
  CHECK(one.mean == seven.mean);
  CHECK(one.m2 == seven.m2);
}
