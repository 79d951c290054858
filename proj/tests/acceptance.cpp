// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit if any
// criterion fails. Everything runs in-process at desk scale.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "chaoslab/disorder.hpp"
#include "chaoslab/hermite.hpp"
#include "chaoslab/observables.hpp"
#include "chaoslab/runner.hpp"
#include "oracles.hpp"

using namespace chaoslab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

const std::vector<double> kTGrid{0.0, 0.25, 0.5, 0.75, 0.9};
const std::vector<std::pair<double, double>> kBetaPairs{{1.0, 1.0}, {0.5, 2.0}};

ModelParams lattice(ModelFamily family, std::vector<std::size_t> dims) {
  ModelParams m;
  m.family = family;
  m.lattice = std::move(dims);
  return m;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

std::string describe(const BoundReport& r) {
  return std::string(to_string(r.theorem)) + " " + r.family + " |E|=" + std::to_string(r.e_size) +
         " t=" + fmt(r.t) + " g=(" + fmt(r.gamma1) + "," + fmt(r.gamma2) + ") k=" +
         std::to_string(r.k) + " lhs=" + fmt(r.lhs.value) + "+-" + fmt(r.lhs.stderr) +
         " rhs=" + fmt(r.rhs) + " verdict=" + std::string(to_string(r.verdict));
}

/// Runs a point, requires an explicit lhs - 3 se <= rhs, tracks the
/// largest lhs/rhs ratio seen.
BoundReport check_point(Outcome& o, double& worst_ratio, const ExperimentPoint& p,
                        std::size_t n, std::uint64_t seed,
                        const EngineChoice& engine = EngineChoice::exact()) {
  const BoundReport r = run_theorem(p, engine, n, seed);
  const bool holds = r.lhs.value - kStderrSlack * r.lhs.stderr <= r.rhs;
  o.require(holds && r.verdict == Verdict::pass, describe(r));
  if (r.rhs > 0) worst_ratio = std::max(worst_ratio, r.lhs.value / r.rhs);
  return r;
}

void bond_grid(Outcome& o, TheoremId theorem, const std::vector<std::pair<double, double>>& betas,
               std::size_t n) {
  double worst = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 1000;
  for (auto dims : {std::vector<std::size_t>{2, 2}, {2, 3}, {3, 3}})
    for (auto [b1, b2] : betas)
      for (double t : kTGrid) {
        ExperimentPoint p;
        p.theorem = theorem;
        p.model = lattice(ModelFamily::ea, dims);
        p.gamma1 = b1;
        p.gamma2 = b2;
        p.t = t;
        check_point(o, worst, p, n, ++seed);
        ++points;
      }
  o.detail << points << " points, " << n << " draws each, max lhs/rhs " << fmt(worst);
}

Outcome criterion1() {
  Outcome o;
  bond_grid(o, TheoremId::thm2_1, kBetaPairs, 1000);
  return o;
}

Outcome criterion2() {
  Outcome o;
  bond_grid(o, TheoremId::thm2_1_twotemp, {{0.5, 2.0}}, 1000);
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 3000;
  for (auto dims : {std::vector<std::size_t>{2}, {2, 2}}) {
    const Graph g = lattice_graph(dims, false);
    const double cap = 1.0 / std::sqrt(double(g.edge_count()));
    for (auto [b1, b2] : kBetaPairs)
      for (double t : kTGrid) {
        const CoupledPair pair = couple(make_ea(g, b1, 0.0), make_ea(g, b2, 0.0), t, {++seed, 0});
        const Estimate e = intermediate_identity_check(pair, 1000, seed);
        o.require(e.value <= cap + 3.0 * e.stderr,
                  "|E|=" + std::to_string(g.edge_count()) + " t=" + fmt(t) + " beta=(" + fmt(b1) +
                      "," + fmt(b2) + ") value=" + fmt(e.value) + "+-" + fmt(e.stderr) +
                      " cap=" + fmt(cap));
        worst = std::max(worst, e.value / cap);
        ++points;
      }
  }
  o.detail << points << " points, max value/cap " << fmt(worst);
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 4000;
  const std::size_t n = 400;
  auto sweep = [&](TheoremId id, const ModelParams& m) {
    for (auto [b1, b2] : kBetaPairs)
      for (double t : {0.0, 0.5, 0.9}) {
        ExperimentPoint p;
        p.theorem = id;
        p.model = m;
        p.gamma1 = b1;
        p.gamma2 = b2;
        p.t = t;
        check_point(o, worst, p, n, ++seed);
        ++points;
      }
  };
  for (int chaos_p : {1, 2, 3}) {
    ModelParams m;
    m.family = ModelFamily::mixed_pspin;
    m.n = 4;
    m.p = chaos_p;
    for (int q : {1, 2, 3})
      if (q != chaos_p) m.betas[q] = 0.5;
    sweep(TheoremId::mixed_pspin, m);
  }
  ModelParams vsk;
  vsk.family = ModelFamily::vector_sk;
  vsk.n = 3;
  vsk.points = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.5, -0.5}};
  sweep(TheoremId::vector_sk, vsk);
  ModelParams dil;
  dil.family = ModelFamily::diluted;
  dil.n = 6;
  dil.lambda = 1.0;
  dil.p = 2;
  sweep(TheoremId::diluted, dil);
  ModelParams site = lattice(ModelFamily::ea, {2, 3});
  site.chaos = ChaosTerm::field;
  site.beta = 0.5;
  sweep(TheoremId::ea_site, site);
  o.detail << points << " points (mixed p-spin, vector SK, diluted, EA site), " << n
           << " draws each, max lhs/rhs " << fmt(worst);
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::uint64_t seed = 5000;
  for (double m : {10.0, 100.0}) {
    const DilutedTail tail = diluted_tail(m, 100000, {++seed, 0});
    o.require(tail.mc_value <= tail.analytic_cap + 3.0 * tail.stderr,
              "lambda N=" + fmt(m) + " mc=" + fmt(tail.mc_value) + " cap=" + fmt(tail.analytic_cap));
    o.detail << "lambda N=" << m << ": mc " << fmt(tail.mc_value) << " +- " << fmt(tail.stderr)
             << " <= cap " << fmt(tail.analytic_cap) << "; ";
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  double worst = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 6000;
  for (WeightKind kind : {WeightKind::uniform, WeightKind::random_signed})
    for (double gamma : {0.25, 1.0, 4.0}) {
      ExperimentPoint p;
      p.theorem = TheoremId::thm3_1;
      p.model = lattice(ModelFamily::rfim, {2, 3});
      p.model.beta = 0.5;
      p.gamma1 = gamma;
      p.weights.kind = kind;
      p.weights.seed = 77;
      check_point(o, worst, p, 1000, ++seed);
      ++points;
    }
  o.detail << points << " points (uniform and random signed weights), max lhs/rhs " << fmt(worst);
  return o;
}

Outcome criterion7() {
  Outcome o;
  double worst = 0.0, worst_gap = INFINITY;
  std::size_t points = 0;
  std::uint64_t seed = 7000;
  for (auto dims : {std::vector<std::size_t>{2, 2}, {2, 3}})
    for (double beta : {0.3, 0.6, 1.0})
      for (double h : {0.5, 1.0, 2.0}) {
        ExperimentPoint p;
        p.theorem = TheoremId::fkg_overlap;
        p.model = lattice(ModelFamily::rfim, dims);
        p.model.beta = beta;
        p.gamma1 = h;
        const BoundReport r = check_point(o, worst, p, 500, ++seed);
        o.require(r.worst_gap.has_value() && *r.worst_gap >= -kFkgTolerance,
                  "fkg gap " + describe(r));
        if (r.worst_gap) worst_gap = std::min(worst_gap, *r.worst_gap);
        ++points;
      }
  // Antiferromagnetic bonds must be caught by the correlation check.
  ExperimentPoint anti;
  anti.theorem = TheoremId::fkg_overlap;
  anti.model = lattice(ModelFamily::rfim, {2, 2});
  anti.model.beta = 1.0;
  anti.model.bond_sign = -1.0;
  anti.gamma1 = 1.0;
  const BoundReport neg = run_theorem(anti, EngineChoice::exact(), 100, ++seed);
  o.require(neg.verdict == Verdict::hypothesis_failed && neg.worst_gap && *neg.worst_gap < -kFkgTolerance,
            "negative control not flagged: " + describe(neg));
  o.detail << points << " points, min gap " << fmt(worst_gap) << ", max lhs/rhs " << fmt(worst)
           << "; negative control gap " << fmt(neg.worst_gap.value_or(NAN)) << " -> "
           << to_string(neg.verdict);
  return o;
}

Outcome criterion8() {
  Outcome o;
  double worst = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 8000;
  for (auto dims : {std::vector<std::size_t>{2, 2}, {2, 3}}) {
    for (double h : {0.5, 1.0, 2.0}) {
      ExperimentPoint p;
      p.theorem = TheoremId::eqlast;
      p.model = lattice(ModelFamily::rfim, dims);
      p.model.beta = 0.5;
      p.gamma1 = h;
      check_point(o, worst, p, 1000, ++seed);
      ++points;
    }
    for (double h : {0.05, 0.5, 1.0, 2.0}) {
      ExperimentPoint p;
      p.theorem = TheoremId::eqlast2;
      p.model = lattice(ModelFamily::rfim, dims);
      p.model.beta = 0.5;
      p.gamma1 = h;
      check_point(o, worst, p, 1000, ++seed);
      ++points;
    }
  }
  o.detail << points << " points (gamma-dependent and gamma-free forms), max lhs/rhs " << fmt(worst);
  return o;
}

Outcome criterion9() {
  Outcome o;
  double worst = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 9000;
  for (int k : {1, 2, 3})
    for (double gamma : {0.5, 1.0})
      for (TheoremId id : {TheoremId::thm5_3_ineq1, TheoremId::thm5_3_ineq2}) {
        ExperimentPoint p;
        p.theorem = id;
        p.model = lattice(ModelFamily::rfim, {2, 2});
        p.model.beta = 0.5;
        p.gamma1 = gamma;
        p.k = k;
        const BoundReport r = check_point(o, worst, p, 1000, ++seed);
        ++points;
        if (id == TheoremId::thm5_3_ineq2) {
          o.require(r.ck.has_value(), "C_k missing for k=" + std::to_string(k));
          if (r.ck && gamma == 1.0)
            o.detail << "C_" << k << "=" << fmt(r.ck->c_k)
                     << (r.ck->method == CkMethod::analytic ? " (analytic)" : " (empirical)") << "; ";
          if (k == 1 && r.ck) o.require(r.ck->c_k == 1.0, "C_1 must be 1");
        }
      }
  o.detail << points << " points, max lhs/rhs " << fmt(worst);
  return o;
}

// ---- oracle equivalence ----

struct McSystem {
  std::string name;
  FactorSystem system;
};

Outcome criterion10() {
  Outcome o;
  const std::array<std::size_t, 2> d22{2, 2}, d23{2, 3}, d33{3, 3};
  std::vector<McSystem> systems{
      {"ea 2x2", make_ea(lattice_graph(d22, false), 0.8, 0.3)},
      {"ea 3x3", make_ea(lattice_graph(d33, false), 0.6, 0.2)},
      {"rfim 2x3", make_rfim(lattice_graph(d23, false), 0.5, 1.0)},
      {"mixed p-spin N=4", make_mixed_pspin(4, {{1, 0.3}, {2, 0.8}, {3, 0.4}}, 2)},
  };
  McmcConfig cfg;
  cfg.sweeps = 40000;
  cfg.burn_in = 2000;
  cfg.stderr_cap = 1.0;
  std::uint64_t seed = 10000;
  for (const McSystem& s : systems) {
    std::size_t total = 0, within = 0;
    for (std::size_t draw = 0; draw < 3; ++draw) {
      const Realization r = draw_realization(s.system, {++seed, 0});
      const MomentTable exact = exact_moments(s.system, r, MomentRequest::all());
      const MomentTable mc = mcmc_moments(s.system, r, MomentRequest::all(), cfg, {seed, 1});
      const std::size_t n = exact.index_count();
      for (std::size_t e = 0; e < n; ++e) {
        ++total;
        within += std::abs(mc.first(e) - exact.first(e)) <= 4.0 * mc.first_stderr(e) + 1e-12;
        for (std::size_t f = e; f < n; ++f) {
          ++total;
          within += std::abs(mc.second(e, f) - exact.second(e, f)) <= 4.0 * mc.second_stderr(e, f) + 1e-12;
        }
      }
    }
    const double share = double(within) / double(total);
    o.require(share >= 0.95, s.name + " coverage " + fmt(share));
    o.detail << s.name << " " << within << "/" << total << "; ";
  }

  // Factorized replica moments against a four-fold brute-force sum written
  // directly from the Hamiltonians.
  double worst = 0.0;
  auto compare = [&](const Graph& g, bool sites, double b1, double b2, double t) {
    const std::size_t n = g.vertex_count();
    const FactorSystem a = sites ? make_rfim(g, 0.0, b1) : make_ea(g, b1, 0.0);
    const FactorSystem b = sites ? make_rfim(g, 0.0, b2) : make_ea(g, b2, 0.0);
    const CoupledPair pair = couple(a, b, t, {++seed, 0});
    const Realization r1 = pair.realization_first(), r2 = pair.realization_second();
    const OverlapMoments om = overlap_moments(exact_moments(a, r1, MomentRequest::all()),
                                              exact_moments(b, r2, MomentRequest::all()));
    auto factors = [&](const std::vector<int>& c) {
      std::vector<double> f;
      if (sites)
        for (std::size_t i = 0; i < n; ++i) f.push_back(oracle::spin(c[i]));
      else
        for (const Edge& e : g.edges()) f.push_back(oracle::spin(c[e.i]) * oracle::spin(c[e.j]));
      return f;
    };
    auto weight = [&](double beta, const std::vector<double>& gs) {
      return [&, beta](const std::vector<int>& c) {
        const std::vector<double> f = factors(c);
        double w = 0.0;
        for (std::size_t e = 0; e < f.size(); ++e) w += beta * gs[e] * f[e];
        return w;
      };
    };
    const oracle::Enumeration m1(n, 2, weight(b1, r1.chaos)), m2(n, 2, weight(b2, r2.chaos));
    std::vector<std::vector<double>> f1, f2;
    for (const auto& c : m1.configs) f1.push_back(factors(c));
    for (const auto& c : m2.configs) f2.push_back(factors(c));
    const double norm = double(f1[0].size());
    auto overlap = [&](std::size_t x, std::size_t y) {
      double q = 0.0;
      for (std::size_t e = 0; e < f1[x].size(); ++e) q += f1[x][e] * f2[y][e];
      return q / norm;
    };
    double q = 0.0, q2 = 0.0, q11q21 = 0.0;
    for (std::size_t x = 0; x < f1.size(); ++x)
      for (std::size_t y = 0; y < f2.size(); ++y) {
        const double w = m1.prob[x] * m2.prob[y], qq = overlap(x, y);
        q += w * qq;
        q2 += w * qq * qq;
        for (std::size_t x2 = 0; x2 < f1.size(); ++x2) q11q21 += w * m1.prob[x2] * qq * overlap(x2, y);
      }
    worst = std::max({worst, std::abs(q - om.q), std::abs(q2 - om.q2), std::abs(q11q21 - om.q11q21)});
  };
  const std::array<std::size_t, 1> d2{2}, d3{3};
  for (double t : {0.0, 0.4, 0.9}) {
    compare(lattice_graph(d2, false), false, 1.0, 1.0, t);
    compare(lattice_graph(d3, false), false, 0.5, 2.0, t);
    compare(lattice_graph(d22, false), false, 0.7, 1.3, t);
    compare(lattice_graph(d22, false), true, 0.9, 0.4, t);
  }
  o.require(worst <= 1e-10, "factorization deviation " + fmt(worst));
  o.detail << "factorization max deviation " << fmt(worst);
  return o;
}

Outcome criterion11() {
  Outcome o;
  double ibp = 0.0;
  const std::vector<std::pair<ScalarFunction, ScalarFunction>> fns{
      {[](double x) { return std::tanh(0.8 * x); },
       [](double x) { return 0.8 / std::pow(std::cosh(0.8 * x), 2); }},
      {[](double x) { return std::cos(x) + 0.5 * x; },
       [](double x) { return -std::sin(x) + 0.5; }},
      {[](double x) { return x * x * x * x; }, [](double x) { return 4 * x * x * x; }},
  };
  for (const auto& [f, df] : fns)
    for (int k = 1; k <= 4; ++k) ibp = std::max(ibp, hermite_ibp_residual(k, f, df, 80));
  o.require(ibp <= 1e-8, "ibp residual " + fmt(ibp));

  double quad = 0.0;
  const GaussHermiteRule& rule = gauss_hermite(40);
  for (int k = 0; k <= 6; ++k) {
    const double m = rule.expectation([k](double x) { return hermite(k, x) * hermite(k, x); });
    quad = std::max(quad, std::abs(m / std::tgamma(k + 1.0) - 1.0));
  }
  o.require(quad <= 1e-8, "quadrature relative error " + fmt(quad));

  double corr = 0.0;
  const std::size_t n = 50000;
  for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const CoupledDisorder d = sample_coupled(n, t, {11000, 0});
    double s12 = 0, s11 = 0, s22 = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m1 += d.g1[i] / double(n);
      m2 += d.g2[i] / double(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      s12 += (d.g1[i] - m1) * (d.g2[i] - m2);
      s11 += (d.g1[i] - m1) * (d.g1[i] - m1);
      s22 += (d.g2[i] - m2) * (d.g2[i] - m2);
    }
    const double r = s12 / std::sqrt(s11 * s22);
    corr = std::max(corr, std::abs(r - t) * std::sqrt(double(n)));
  }
  o.require(corr <= 3.0, "correlation deviation " + fmt(corr) + "/sqrt(n)");
  o.detail << "ibp residual " << fmt(ibp) << ", quadrature rel. error " << fmt(quad)
           << ", max |r - t| = " << fmt(corr) << "/sqrt(n)";
  return o;
}

Outcome criterion12() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "chaoslab_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({
  "master_seed": 12,
  "experiments": [
    {"name": "bonds", "theorem": "thm2_1", "model": {"family": "ea", "lattice": [2, 3]},
     "gammas": [[1, 1], [0.5, 2]], "t": [0, 0.5, 0.9], "n_disorder": 200},
    {"name": "pspin", "theorem": "mixed_pspin", "model": {"family": "mixed_pspin", "n": 4, "p": 2, "betas": {"3": 0.5}},
     "t": 0.5, "n_disorder": 100},
    {"name": "diluted", "theorem": "diluted", "model": {"family": "diluted", "n": 6, "lambda": 1, "p": 2},
     "t": 0.5, "n_disorder": 100},
    {"name": "hermite", "theorem": "thm5_3_ineq2", "model": {"family": "rfim", "lattice": [2, 2], "beta": 0.5},
     "k": [1, 2], "n_disorder": 100},
    {"name": "mcmc", "theorem": "ea_site", "model": {"family": "ea", "lattice": [2, 2], "chaos": "field", "beta": 0.5},
     "t": 0.5, "n_disorder": 20, "engine": {"kind": "mcmc", "sweeps": 2000, "burn_in": 200}},
    {"name": "tail", "theorem": "diluted_tail", "lambda_n": [10, 100], "n_disorder": 1000}
  ]
})";
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const char* saved = std::getenv("CHAOSLAB_THREADS");
  const std::string restore = saved ? saved : "";
  std::ostringstream log;
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "4", "4"}) {
    setenv("CHAOSLAB_THREADS", threads, 1);
    const fs::path out = dir / ("out" + std::to_string(outputs.size()));
    const int code = run(dir / "config.json", out, std::nullopt, log);
    o.require(code == kExitOk, "run exit code " + std::to_string(code));
    outputs.push_back(read(out / "results.csv"));
  }
  if (saved) setenv("CHAOSLAB_THREADS", restore.c_str(), 1);
  else unsetenv("CHAOSLAB_THREADS");
  o.require(outputs[0] == outputs[1], "1 vs 4 threads differ");
  o.require(outputs[1] == outputs[2], "repeat run differs");
  std::size_t rows = 0;
  for (char c : outputs[0]) rows += c == '\n';
  o.require(rows > 1, "no rows written");
  o.detail << rows - 1 << " rows byte-identical across 1/4/4 threads";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"two-system bond overlap bound, EA lattices", criterion1},
      {"unequal inverse temperatures", criterion2},
      {"intermediate identity on 1- and 4-edge systems", criterion3},
      {"example families (p-spin, vector SK, diluted, EA site)", criterion4},
      {"diluted Poisson tail", criterion5},
      {"weighted magnetization bound, RFIM 2x3", criterion6},
      {"FKG site-overlap bound and negative control", criterion7},
      {"normalized random field bounds", criterion8},
      {"Hermite field bounds, k = 1..3", criterion9},
      {"MCMC and factorization oracles", criterion10},
      {"math-stack self checks", criterion11},
      {"byte-identical reruns across thread counts", criterion12},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    failures += !o.pass;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": "
              << criteria[i].first << " -- " << o.detail.str() << " (" << fmt(secs) << " s)"
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
