#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "chaoslab/disorder.hpp"
#include "chaoslab/gibbs.hpp"
#include "chaoslab/hermite.hpp"
#include "chaoslab/models.hpp"
#include "chaoslab/runner.hpp"
#include "chaoslab/topology.hpp"

namespace chaoslab {

namespace {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(3) << v;
  return out.str();
}

CheckResult hermite_recurrence() {
  // Explicit low-degree polynomials and the three-term recurrence.
  const std::vector<std::function<double(double)>> closed{
      [](double) { return 1.0; },
      [](double x) { return x; },
      [](double x) { return x * x - 1.0; },
      [](double x) { return x * x * x - 3.0 * x; },
      [](double x) { return x * x * x * x - 6.0 * x * x + 3.0; },
  };
  double worst = 0.0;
  for (double x : {-2.5, -1.0, -0.3, 0.0, 0.7, 1.9, 3.2}) {
    for (int k = 0; k < int(closed.size()); ++k)
      worst = std::max(worst, std::abs(hermite(k, x) - closed[k](x)));
    for (int k = 1; k < kMaxHermiteDegree; ++k) {
      const double rec = x * hermite(k, x) - k * hermite(k - 1, x);
      worst = std::max(worst, std::abs(hermite(k + 1, x) - rec) / (1.0 + std::abs(rec)));
    }
  }
  return {worst <= 1e-12, "max deviation " + fmt(worst)};
}

CheckResult ibp_residual() {
  double worst = 0.0;
  const std::vector<std::pair<ScalarFunction, ScalarFunction>> fns{
      {[](double x) { return std::tanh(x + 0.3); },
       [](double x) { return 1.0 - std::pow(std::tanh(x + 0.3), 2); }},
      {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }},
      {[](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; }},
  };
  for (const auto& [f, df] : fns)
    for (int k = 1; k <= 4; ++k) worst = std::max(worst, hermite_ibp_residual(k, f, df, 80));
  return {worst <= 1e-8, "max residual " + fmt(worst)};
}

CheckResult quadrature_moments() {
  const GaussHermiteRule& rule = gauss_hermite(40);
  double worst = 0.0;
  for (int k = 0; k <= 6; ++k) {
    const double m = rule.expectation([k](double x) { return hermite(k, x) * hermite(k, x); });
    worst = std::max(worst, std::abs(m / std::tgamma(k + 1.0) - 1.0));
  }
  return {worst <= 1e-8, "max relative error " + fmt(worst)};
}

CheckResult coupled_correlation(std::uint64_t seed) {
  const std::size_t n = 20000;
  const double tol = 3.0 / std::sqrt(double(n));
  double worst_ratio = 0.0;
  for (double t : {0.0, 0.3, 0.75, 1.0}) {
    const CoupledDisorder d = sample_coupled(n, t, {seed, 7});
    double s12 = 0.0, s11 = 0.0, s22 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m1 += d.g1[i];
      m2 += d.g2[i];
    }
    m1 /= double(n);
    m2 /= double(n);
    for (std::size_t i = 0; i < n; ++i) {
      s12 += (d.g1[i] - m1) * (d.g2[i] - m2);
      s11 += (d.g1[i] - m1) * (d.g1[i] - m1);
      s22 += (d.g2[i] - m2) * (d.g2[i] - m2);
    }
    const double r = s12 / std::sqrt(s11 * s22);
    worst_ratio = std::max(worst_ratio, std::abs(r - t) / tol);
  }
  return {worst_ratio <= 1.0, "max |r - t| = " + fmt(worst_ratio) + " x 3/sqrt(n)"};
}

CheckResult exact_closed_forms(std::uint64_t seed) {
  double worst = 0.0;
  const FactorSystem spin = make_rfim(Graph(1, {}), 0.0, 0.8);
  const FactorSystem edge = make_ea(Graph(2, {{0, 1}}), 1.3, 0.0);
  for (std::size_t i = 0; i < 8; ++i) {
    const Realization r1 = draw_realization(spin, {seed, i});
    worst = std::max(worst, std::abs(exact_moments(spin, r1, MomentRequest::all()).first(0) -
                                     std::tanh(0.8 * r1.chaos[0])));
    const Realization r2 = draw_realization(edge, {seed, i});
    worst = std::max(worst, std::abs(exact_moments(edge, r2, MomentRequest::all()).first(0) -
                                     std::tanh(1.3 * r2.chaos[0])));
  }
  return {worst <= 1e-12, "max deviation " + fmt(worst)};
}

CheckResult mcmc_vs_exact(std::uint64_t seed) {
  const std::array<std::size_t, 2> dims{3, 3};
  const FactorSystem system = make_ea(lattice_graph(dims, false), 0.7, 0.4);
  const Realization r = draw_realization(system, {seed, 11});
  const MomentTable exact = exact_moments(system, r, MomentRequest::all());
  McmcConfig cfg;
  cfg.sweeps = 40000;
  cfg.burn_in = 2000;
  const MomentTable mc = mcmc_moments(system, r, MomentRequest::all(), cfg, {seed, 12});
  std::size_t total = 0, within = 0;
  const std::size_t n = exact.index_count();
  for (std::size_t e = 0; e < n; ++e) {
    ++total;
    within += std::abs(mc.first(e) - exact.first(e)) <= 4.0 * mc.first_stderr(e) + 1e-12;
    for (std::size_t f = e; f < n; ++f) {
      ++total;
      within += std::abs(mc.second(e, f) - exact.second(e, f)) <=
                4.0 * mc.second_stderr(e, f) + 1e-12;
    }
  }
  const double share = double(within) / double(total);
  return {share >= 0.95, std::to_string(within) + "/" + std::to_string(total) + " within 4 stderr"};
}

CheckResult factorization(std::uint64_t seed) {
  const FactorSystem a = make_ea(Graph(3, {{0, 1}, {1, 2}}), 0.9, 0.5);
  const FactorSystem b = make_ea(Graph(3, {{0, 1}, {1, 2}}), 1.6, 0.5);
  const CoupledPair pair = couple(a, b, 0.4, {seed, 21});
  const ExactEnumerator e1(pair.first), e2(pair.second);
  const Realization r1 = pair.realization_first(), r2 = pair.realization_second();
  const OverlapMoments om = overlap_moments(e1.moments(r1, MomentRequest::all()),
                                            e2.moments(r2, MomentRequest::all()));

  const std::vector<double> p1 = e1.distribution(r1), p2 = e2.distribution(r2);
  const std::size_t c = e1.configuration_count(), n_edges = a.index_count();
  std::vector<std::vector<double>> f1(c, std::vector<double>(n_edges)), f2 = f1;
  SpinConfiguration states(a.site_count);
  for (std::size_t x = 0; x < c; ++x) {
    e1.decode(x, states);
    for (std::size_t e = 0; e < n_edges; ++e) f1[x][e] = a.bond(e, states);
    e2.decode(x, states);
    for (std::size_t e = 0; e < n_edges; ++e) f2[x][e] = b.bond(e, states);
  }
  auto overlap = [&](std::size_t s, std::size_t r) {
    double q = 0.0;
    for (std::size_t e = 0; e < n_edges; ++e) q += f1[s][e] * f2[r][e];
    return q / double(n_edges);
  };
  double q = 0.0, q2 = 0.0, q11q21 = 0.0;
  for (std::size_t s = 0; s < c; ++s)
    for (std::size_t r = 0; r < c; ++r) {
      const double w = p1[s] * p2[r], o = overlap(s, r);
      q += w * o;
      q2 += w * o * o;
      for (std::size_t s2 = 0; s2 < c; ++s2) q11q21 += w * p1[s2] * o * overlap(s2, r);
    }
  const double worst =
      std::max({std::abs(q - om.q), std::abs(q2 - om.q2), std::abs(q11q21 - om.q11q21)});
  return {worst <= 1e-10, "max deviation " + fmt(worst)};
}

CheckResult two_spin_distribution(std::uint64_t seed) {
  const FactorSystem system = make_ea(Graph(2, {{0, 1}}), 1.1, 0.6);
  const Realization r = draw_realization(system, {seed, 31});
  const ExactEnumerator enumerator(system);
  const std::vector<double> p = enumerator.distribution(r);
  std::map<SpinConfiguration, std::size_t> code;
  SpinConfiguration states(system.site_count);
  for (std::size_t x = 0; x < enumerator.configuration_count(); ++x) {
    enumerator.decode(x, states);
    code[states] = x;
  }
  MetropolisChain chain(system, r, make_engine({seed, 32}, domain::mcmc_chain));
  for (int i = 0; i < 1000; ++i) chain.sweep();
  const std::size_t n = 200000;
  std::vector<double> hist(p.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    chain.sweep();
    const Spins s = chain.state();
    hist[code.at(SpinConfiguration(s.begin(), s.end()))] += 1.0 / double(n);
  }
  double tv = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) tv += 0.5 * std::abs(hist[x] - p[x]);
  return {tv <= 0.01, "total variation " + fmt(tv)};
}

}  // namespace

int selftest(std::ostream& out, std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(20240917);
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks{
      {"hermite_recurrence", hermite_recurrence},
      {"hermite_ibp_residual", ibp_residual},
      {"quadrature_second_moment", quadrature_moments},
      {"coupled_correlation", [seed] { return coupled_correlation(seed); }},
      {"exact_closed_forms", [seed] { return exact_closed_forms(seed); }},
      {"mcmc_vs_exact", [seed] { return mcmc_vs_exact(seed); }},
      {"replica_factorization", [seed] { return factorization(seed); }},
      {"two_spin_distribution", [seed] { return two_spin_distribution(seed); }},
  };
  std::size_t failed = 0;
  out << std::left << std::setw(28) << "check" << std::setw(8) << "result"
      << "detail\n";
  for (const auto& [name, check] : checks) {
    const auto started = std::chrono::steady_clock::now();
    CheckResult result;
    try {
      result = check();
    } catch (const std::exception& e) {
      result = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    failed += !result.pass;
    out << std::left << std::setw(28) << name << std::setw(8) << (result.pass ? "ok" : "FAIL")
        << result.detail << " (" << fmt(secs) << " s)\n";
  }
  if (failed == 0) {
    out << "all " << checks.size() << " checks passed\n";
    return kExitOk;
  }
  out << failed << " of " << checks.size() << " checks failed\n";
  return kExitError;
}

}  // namespace chaoslab
