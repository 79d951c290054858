#include <doctest.h>

#include <array>
#include <cmath>

#include "chaoslab/errors.hpp"
#include "chaoslab/gibbs.hpp"
#include "oracles.hpp"

using namespace chaoslab;

namespace {
Graph grid(std::size_t a, std::size_t b) {
  const std::array<std::size_t, 2> d{a, b};
  return lattice_graph(d, false);
}

/// Brute-force Gibbs measure of an EA system written out from the model.
oracle::Enumeration ea_oracle(const Graph& g, double beta, double h, const Realization& r) {
  return oracle::Enumeration(g.vertex_count(), 2, [&](const std::vector<int>& s) {
    double w = 0.0;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
      w += beta * r.chaos[e] * oracle::spin(s[g.edges()[e].i]) * oracle::spin(s[g.edges()[e].j]);
    for (std::size_t i = 0; i < g.vertex_count(); ++i)
      w += h * r.residual[0][i] * oracle::spin(s[i]);
    return w;
  });
}

double bond(const Graph& g, std::size_t e, const std::vector<int>& s) {
  return oracle::spin(s[g.edges()[e].i]) * oracle::spin(s[g.edges()[e].j]);
}

/// Share of MCMC entries within 4 stderr of the exact ones.
double mcmc_coverage(const FactorSystem& sys, const Realization& r, std::uint64_t seed) {
  const MomentTable exact = exact_moments(sys, r, MomentRequest::all());
  McmcConfig cfg;
  cfg.sweeps = 40000;
  cfg.burn_in = 2000;
  cfg.chains = 2;
  const MomentTable mc = mcmc_moments(sys, r, MomentRequest::all(), cfg, {seed, 0});
  std::size_t n = 0, ok = 0;
  for (std::size_t e = 0; e < exact.index_count(); ++e) {
    ++n;
    ok += std::abs(mc.first(e) - exact.first(e)) <= 4 * mc.first_stderr(e) + 1e-12;
    for (std::size_t f = e; f < exact.index_count(); ++f) {
      ++n;
      ok += std::abs(mc.second(e, f) - exact.second(e, f)) <= 4 * mc.second_stderr(e, f) + 1e-12;
    }
  }
  return double(ok) / double(n);
}
}  // namespace

TEST_CASE("exact moments match naive enumeration") {
  const Graph g = grid(2, 3);
  const FactorSystem sys = make_ea(g, 0.9, 0.4);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const Realization r = draw_realization(sys, {2, i});
    const MomentTable m = exact_moments(sys, r, MomentRequest::all());
    const oracle::Enumeration ref = ea_oracle(g, 0.9, 0.4, r);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
      CHECK(m.first(e) == doctest::Approx(ref.mean([&](auto& s) { return bond(g, e, s); })).epsilon(1e-12));
      for (std::size_t f = 0; f < g.edge_count(); ++f) {
        const double want = ref.mean([&](auto& s) { return bond(g, e, s) * bond(g, f, s); });
        CHECK(m.second(e, f) == doctest::Approx(want).epsilon(1e-12));
        CHECK(m.second(e, f) == m.second(f, e));
      }
    }
  }
}

TEST_CASE("log partition function of a single bond") {
  const FactorSystem sys = make_ea(Graph(2, {{0, 1}}), 1.5, 0.0);
  const Realization r = make_realization(sys, {0.7});
  // Z = sum over 4 configurations of (1/4) exp(1.5 * 0.7 * s0 s1) = cosh(1.05)
  CHECK(exact_moments(sys, r, MomentRequest::first_only()).log_partition() ==
        doctest::Approx(std::log(std::cosh(1.05))).epsilon(1e-13));
}

TEST_CASE("extreme couplings stay finite") {
  const FactorSystem sys = make_ea(grid(2, 2), 400.0, 0.0);
  const Realization r = make_realization(sys, {3.0, -2.0, 1.5, 2.5});
  const MomentTable m = exact_moments(sys, r, MomentRequest::all());
  for (std::size_t e = 0; e < 4; ++e) CHECK(std::isfinite(m.first(e)));
}

TEST_CASE("vector spins: exact moments match naive enumeration") {
  const std::vector<std::vector<double>> pts{{1, 0}, {0, 1}, {-1, 0}, {1, 1}};
  const std::vector<double> nu{0.1, 0.2, 0.3, 0.4};
  const FactorSystem sys = make_vector_sk(3, pts, 1.3, nu);
  const Realization r = draw_realization(sys, {9, 9});
  const double s = 1.0 / std::sqrt(2.0);
  auto dot = [&](int a, int b) {
    return s * s * (pts[a][0] * pts[b][0] + pts[a][1] * pts[b][1]);
  };
  const oracle::Enumeration ref(3, 4, [&](const std::vector<int>& c) {
    double w = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      w += std::log(nu[c[i]]);
      for (std::size_t j = 0; j < 3; ++j) w += 1.3 / std::sqrt(3.0) * r.chaos[i * 3 + j] * dot(c[i], c[j]);
    }
    return w;
  });
  const MomentTable m = exact_moments(sys, r, MomentRequest::all());
  for (std::size_t e = 0; e < 9; ++e) {
    const std::size_t i = e / 3, j = e % 3;
    CHECK(m.first(e) == doctest::Approx(ref.mean([&](auto& c) { return dot(c[i], c[j]); })).epsilon(1e-12));
  }
  const double want = ref.mean([&](auto& c) { return dot(c[0], c[1]) * dot(c[2], c[2]); });
  CHECK(m.second(1, 8) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("listed pairs and capacity limits") {
  const FactorSystem sys = make_ea(grid(2, 3), 1.0, 0.0);
  const Realization r = draw_realization(sys, {1, 1});
  const MomentTable all = exact_moments(sys, r, MomentRequest::all());
  const MomentTable some = exact_moments(sys, r, MomentRequest::pairs({{4, 1}, {2, 2}}));
  CHECK(some.has_second(1, 4));
  CHECK(!some.has_second(0, 3));
  CHECK(some.second(4, 1) == doctest::Approx(all.second(1, 4)).epsilon(1e-14));
  CHECK_THROWS(some.second(0, 3));
  const MomentTable none = exact_moments(sys, r, MomentRequest::first_only());
  CHECK(!none.has_second(0, 0));

  const FactorSystem big = make_ea(grid(5, 5), 1.0, 0.0);
  CHECK_THROWS_AS(ExactEnumerator{big}, CapacityError);
}

TEST_CASE("MCMC agrees with exact enumeration on small systems") {
  CHECK(mcmc_coverage(make_ea(grid(3, 3), 0.8, 0.3), draw_realization(make_ea(grid(3, 3), 0.8, 0.3), {1, 1}), 17) >= 0.95);
  const FactorSystem rfim = make_rfim(grid(2, 3), 0.6, 1.0);
  CHECK(mcmc_coverage(rfim, draw_realization(rfim, {2, 2}), 18) >= 0.95);
  const FactorSystem pspin = make_mixed_pspin(4, {{1, 0.5}, {2, 0.9}, {3, 1.1}}, 2);
  CHECK(mcmc_coverage(pspin, draw_realization(pspin, {3, 3}), 19) >= 0.95);
  const FactorSystem vsk =
      make_vector_sk(3, {{1, 0}, {0, 1}, {-1, 0}, {1, 1}}, 1.2, {0.25, 0.25, 0.25, 0.25});
  CHECK(mcmc_coverage(vsk, draw_realization(vsk, {4, 4}), 20) >= 0.95);
}

TEST_CASE("MCMC is reproducible and validates its config") {
  const FactorSystem sys = make_ea(grid(2, 2), 1.0, 0.0);
  const Realization r = draw_realization(sys, {5, 5});
  McmcConfig cfg;
  cfg.sweeps = 3000;
  cfg.burn_in = 100;
  const MomentTable a = mcmc_moments(sys, r, MomentRequest::all(), cfg, {1, 2});
  const MomentTable b = mcmc_moments(sys, r, MomentRequest::all(), cfg, {1, 2});
  CHECK(a.first_moments() == b.first_moments());
  cfg.burn_in = 5000;
  CHECK_THROWS(cfg.validate());
  cfg.burn_in = 10;
  cfg.stderr_cap = 1e-9;
  CHECK_THROWS_AS(mcmc_moments(sys, r, MomentRequest::all(), cfg, {1, 2}), NonConvergenceError);
}

TEST_CASE("factorized replica moments equal multi-replica enumeration") {
  struct Case {
    FactorSystem a, b;
  };
  const std::vector<Case> cases{
      {make_ea(grid(2, 2), 0.7, 0.4), make_ea(grid(2, 2), 1.9, 0.4)},
      {make_mixed_pspin(3, {{1, 0.4}, {2, 1.0}}, 2), make_mixed_pspin(3, {{1, 0.4}, {2, 0.6}}, 2)},
      {make_rfim(grid(2, 2), 0.5, 1.0), make_rfim(grid(2, 2), 0.5, 2.0)},
      {make_vector_sk(2, {{1, 0}, {0, 1}, {-1, 0}}, 1.0, {0.2, 0.3, 0.5}),
       make_vector_sk(2, {{1, 0}, {0, 1}, {-1, 0}}, 0.4, {0.2, 0.3, 0.5})},
  };
  for (const Case& c : cases) {
    const CoupledPair pair = couple(c.a, c.b, 0.35, {6, 1});
    const ExactEnumerator e1(pair.first), e2(pair.second);
    const Realization r1 = pair.realization_first(), r2 = pair.realization_second();
    const OverlapMoments om = overlap_moments(e1.moments(r1, MomentRequest::all()),
                                              e2.moments(r2, MomentRequest::all()));
    // Replica configurations weighted by the product Gibbs measure, with
    // the configuration probabilities taken from explicit log weights.
    const std::size_t n = c.a.site_count, q = c.a.space->state_count();
    std::vector<SpinConfiguration> configs;
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= q;
    for (std::size_t x = 0; x < total; ++x) {
      SpinConfiguration s(n);
      std::size_t code = x;
      for (auto& v : s) {
        v = std::uint32_t(code % q);
        code /= q;
      }
      configs.push_back(s);
    }
    auto probabilities = [&](const FactorSystem& sys, const Realization& r) {
      std::vector<double> p(total);
      double z = 0.0;
      for (std::size_t x = 0; x < total; ++x) z += p[x] = std::exp(log_weight(sys, r, configs[x]));
      for (double& v : p) v /= z;
      return p;
    };
    const auto p1 = probabilities(c.a, r1), p2 = probabilities(c.b, r2);
    const std::size_t m = c.a.index_count();
    auto overlap = [&](std::size_t s, std::size_t r) {
      double acc = 0.0;
      for (std::size_t e = 0; e < m; ++e) acc += c.a.bond(e, configs[s]) * c.b.bond(e, configs[r]);
      return acc / double(m);
    };
    std::vector<double> table(total * total);
    for (std::size_t s = 0; s < total; ++s)
      for (std::size_t r = 0; r < total; ++r) table[s * total + r] = overlap(s, r);
    double q1 = 0, q2 = 0, q3 = 0;
    for (std::size_t s = 0; s < total; ++s)
      for (std::size_t r = 0; r < total; ++r) {
        const double w = p1[s] * p2[r], o = table[s * total + r];
        q1 += w * o;
        q2 += w * o * o;
        for (std::size_t s2 = 0; s2 < total; ++s2) q3 += w * p1[s2] * o * table[s2 * total + r];
      }
    CHECK(std::abs(om.q - q1) <= 1e-10);
    CHECK(std::abs(om.q2 - q2) <= 1e-10);
    CHECK(std::abs(om.q11q21 - q3) <= 1e-10);
    const Estimate v = replica_variance(pair, EngineChoice::exact());
    CHECK(std::abs(v.value - (q2 - q1 * q1)) <= 1e-10);
  }
}

TEST_CASE("empty diluted draw has Q = 1 and zero variance") {
  const FactorSystem empty = make_diluted(IndexFamily::clauses(4, 2, {}), 1.0);
  const CoupledPair pair = couple(empty, empty, 0.5, {1, 1});
  CHECK(replica_variance(pair, EngineChoice::exact()).value == 0.0);
}
