#include "chaoslab/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "chaoslab/errors.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

namespace {

constexpr std::array<std::pair<TheoremId, std::string_view>, 18> kTheoremNames{{
    {TheoremId::thm2_1, "thm2_1"},
    {TheoremId::thm2_1_twotemp, "thm2_1_twotemp"},
    {TheoremId::main1, "main1"},
    {TheoremId::eqChatt1_ref, "eqChatt1_ref"},
    {TheoremId::mixed_pspin, "mixed_pspin"},
    {TheoremId::vector_sk, "vector_sk"},
    {TheoremId::diluted, "diluted"},
    {TheoremId::ea_bond, "ea_bond"},
    {TheoremId::ea_site, "ea_site"},
    {TheoremId::thm3_1, "thm3_1"},
    {TheoremId::fkg_overlap, "fkg_overlap"},
    {TheoremId::thm5_1, "thm5_1"},
    {TheoremId::thm5_2, "thm5_2"},
    {TheoremId::thm5_3_ineq1, "thm5_3_ineq1"},
    {TheoremId::thm5_3_ineq2, "thm5_3_ineq2"},
    {TheoremId::eqlast, "eqlast"},
    {TheoremId::eqlast2, "eqlast2"},
    {TheoremId::diluted_tail, "diluted_tail"},
}};

double factorial(int k) { return std::tgamma(double(k) + 1.0); }

template <class T>
T need(const std::optional<T>& v, TheoremId id, const char* name) {
  if (!v)
    throw std::invalid_argument(std::string(to_string(id)) + ": missing parameter '" + name + "'");
  return *v;
}

void require_positive(double v, TheoremId id, const char* name) {
  if (!(v > 0.0))
    throw std::invalid_argument(std::string(to_string(id)) + ": parameter '" + name +
                                "' must be positive");
}

void require_t(double t, TheoremId id) {
  if (!(t >= 0.0 && t < 1.0))
    throw std::invalid_argument(std::string(to_string(id)) +
                                ": t must lie in [0, 1); the bound is void at t = 1");
}

double two_system(double g1, double g2, double size, double t) {
  return 4.0 * (g1 + g2) / (g1 * g2 * std::sqrt(size * (1.0 - t)));
}

}  // namespace

std::string_view to_string(TheoremId id) {
  for (const auto& [key, name] : kTheoremNames)
    if (key == id) return name;
  return "unknown";
}

std::optional<TheoremId> parse_theorem(std::string_view name) {
  for (const auto& [key, label] : kTheoremNames)
    if (label == name) return key;
  return std::nullopt;
}

const std::vector<TheoremId>& all_theorems() {
  static const std::vector<TheoremId> ids = [] {
    std::vector<TheoremId> out;
    for (const auto& entry : kTheoremNames) out.push_back(entry.first);
    return out;
  }();
  return ids;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::hypothesis_failed: return "hypothesis_failed";
    case Verdict::reference: return "reference";
  }
  return "unknown";
}

// ------------------------------------------------------------------ RHS

double rhs_thm2_1(double gamma1, double gamma2, std::size_t e_size, double t) {
  if (!(gamma1 > 0.0 && gamma2 > 0.0))
    throw std::invalid_argument("rhs_thm2_1: gamma1 and gamma2 must be positive");
  if (e_size == 0) throw std::invalid_argument("rhs_thm2_1: |E| must be positive");
  require_t(t, TheoremId::thm2_1);
  return two_system(gamma1, gamma2, double(e_size), t);
}

double rhs_reference_chaos(double beta, std::size_t e_size, double t) {
  if (!(beta > 0.0)) throw std::invalid_argument("rhs_reference_chaos: beta must be positive");
  if (e_size == 0) throw std::invalid_argument("rhs_reference_chaos: |E| must be positive");
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument("rhs_reference_chaos: formula is singular unless 0 < t < 1");
  if (t > 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
  return 2.0 * std::sqrt(2.0) /
         (beta * std::pow(t, 0.25) * std::sqrt(double(e_size) * std::log(1.0 / t)));
}

double poisson_inverse_sqrt_mean(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("poisson_inverse_sqrt_mean: mean must be positive and finite");
  const double spread = 40.0 * std::sqrt(mean) + 60.0;
  const auto lo = static_cast<long long>(std::max(1.0, std::floor(mean - spread)));
  const auto hi = static_cast<long long>(std::ceil(mean + spread));
  const double log_mean = std::log(mean);
  double sum = 0.0;
  for (long long k = lo; k <= hi; ++k) {
    const double kd = double(k);
    sum += std::exp(-mean + kd * log_mean - std::lgamma(kd + 1.0)) / std::sqrt(kd);
  }
  return sum;
}

double rhs_family(TheoremId id, const BoundParameters& p) {
  switch (id) {
    case TheoremId::thm2_1:
    case TheoremId::thm2_1_twotemp:
    case TheoremId::ea_bond: {
      const double g1 = need(p.gamma1, id, "gamma1"), g2 = need(p.gamma2, id, "gamma2");
      const double t = need(p.t, id, "t"), e = need(p.e_size, id, "e_size");
      require_positive(g1, id, "gamma1");
      require_positive(g2, id, "gamma2");
      require_positive(e, id, "e_size");
      require_t(t, id);
      return two_system(g1, g2, e, t);
    }
    case TheoremId::main1: {
      const double g = need(p.gamma1, id, "gamma1");
      const double t = need(p.t, id, "t"), e = need(p.e_size, id, "e_size");
      require_positive(g, id, "gamma1");
      require_positive(e, id, "e_size");
      require_t(t, id);
      return 8.0 / (g * std::sqrt(e * (1.0 - t)));
    }
    case TheoremId::eqChatt1_ref: {
      const double g = need(p.gamma1, id, "gamma1");
      const double e = need(p.e_size, id, "e_size");
      require_positive(e, id, "e_size");
      return rhs_reference_chaos(g, static_cast<std::size_t>(std::llround(e)), need(p.t, id, "t"));
    }
    case TheoremId::mixed_pspin:
    case TheoremId::vector_sk: {
      const double g1 = need(p.gamma1, id, "gamma1"), g2 = need(p.gamma2, id, "gamma2");
      const double t = need(p.t, id, "t"), n = need(p.n, id, "n");
      require_positive(g1, id, "gamma1");
      require_positive(g2, id, "gamma2");
      require_positive(n, id, "n");
      require_t(t, id);
      return two_system(g1, g2, n, t);
    }
    case TheoremId::diluted: {
      const double g1 = need(p.gamma1, id, "gamma1"), g2 = need(p.gamma2, id, "gamma2");
      const double t = need(p.t, id, "t"), m = need(p.poisson_mean, id, "poisson_mean");
      require_positive(g1, id, "gamma1");
      require_positive(g2, id, "gamma2");
      require_t(t, id);
      return two_system(g1, g2, 1.0, t) * poisson_inverse_sqrt_mean(m);
    }
    case TheoremId::ea_site: {
      const double g1 = need(p.gamma1, id, "gamma1"), g2 = need(p.gamma2, id, "gamma2");
      const double t = need(p.t, id, "t"), v = need(p.v_size, id, "v_size");
      require_positive(g1, id, "gamma1");
      require_positive(g2, id, "gamma2");
      require_positive(v, id, "v_size");
      require_t(t, id);
      return two_system(g1, g2, v, t);
    }
    case TheoremId::thm3_1: {
      const double g = need(p.gamma, id, "gamma");
      require_positive(g, id, "gamma");
      return need(p.norm2, id, "norm2") * need(p.norm1, id, "norm1") / g;
    }
    case TheoremId::fkg_overlap: {
      const double h = need(p.gamma, id, "gamma"), v = need(p.v_size, id, "v_size");
      require_positive(h, id, "gamma");
      require_positive(v, id, "v_size");
      return 2.0 / (h * std::sqrt(v));
    }
    case TheoremId::thm5_1: {
      const double g = need(p.gamma, id, "gamma");
      require_positive(g, id, "gamma");
      return std::sqrt(2.0) * need(p.norm2, id, "norm2") * need(p.norm1, id, "norm1") / g;
    }
    case TheoremId::thm5_2: {
      const double a2 = need(p.norm2, id, "norm2"), a1 = need(p.norm1, id, "norm1");
      return a2 * a2 + std::sqrt(2.0) * a2 * a1;
    }
    case TheoremId::thm5_3_ineq1: {
      const double g = need(p.gamma, id, "gamma");
      const int k = need(p.k, id, "k");
      require_positive(g, id, "gamma");
      if (k < 1) throw std::invalid_argument("thm5_3_ineq1: k must be at least 1");
      return std::sqrt(factorial(k) * factorial(k + 1)) * need(p.norm1, id, "norm1") *
             need(p.norm2, id, "norm2") / g;
    }
    case TheoremId::thm5_3_ineq2: {
      const double g = need(p.gamma, id, "gamma");
      const int k = need(p.k, id, "k");
      const double c = need(p.c_k, id, "c_k");
      require_positive(g, id, "gamma");
      if (k < 1) throw std::invalid_argument("thm5_3_ineq2: k must be at least 1");
      const double a1 = need(p.norm1, id, "norm1"), a2 = need(p.norm2, id, "norm2");
      return c * std::sqrt(factorial(k + 1)) * std::pow(g, k - 1) * a1 * a2 +
             factorial(k) * a2 * a2;
    }
    case TheoremId::eqlast: {
      const double h = need(p.gamma, id, "gamma"), v = need(p.v_size, id, "v_size");
      require_positive(h, id, "gamma");
      require_positive(v, id, "v_size");
      return std::sqrt(2.0) / (h * std::sqrt(v));
    }
    case TheoremId::eqlast2: {
      const double v = need(p.v_size, id, "v_size");
      require_positive(v, id, "v_size");
      return 1.0 / v + std::sqrt(2.0) / std::sqrt(v);
    }
    case TheoremId::diluted_tail: {
      const double m = need(p.poisson_mean, id, "poisson_mean");
      if (!(m > std::sqrt(2.0)))
        throw std::invalid_argument("diluted_tail: lambda N must exceed sqrt(2) for a positive cap");
      return 1.0 / (std::sqrt(m) - std::sqrt(2.0 / m));
    }
  }
  throw std::invalid_argument("rhs_family: unknown theorem");
}

DilutedTail diluted_tail(double lambda_n, std::size_t n_draws, const SeedSpec& seed) {
  if (!(lambda_n > std::sqrt(2.0)))
    throw std::invalid_argument(
        "diluted_tail: lambda N must exceed sqrt(2), otherwise the cap "
        "1/(sqrt(lambda N) - sqrt(2/(lambda N))) is not positive");
  if (n_draws < 2) throw std::invalid_argument("diluted_tail: need at least 2 draws");
  Engine engine = make_engine(seed, domain::poisson);
  std::poisson_distribution<long long> poisson(lambda_n);
  std::vector<double> values(n_draws);
  for (double& v : values) {
    const long long pi = poisson(engine);
    v = pi >= 1 ? 1.0 / std::sqrt(double(pi)) : 0.0;
  }
  const RunningStats stats = tree_reduce(values);
  BoundParameters p;
  p.poisson_mean = lambda_n;
  return {stats.mean, stats.stderr_of_mean(), rhs_family(TheoremId::diluted_tail, p)};
}

// ------------------------------------------------------------------ C_k

double gibbs_derivative(const ExactEnumerator& enumerator, const Realization& r, std::size_t e,
                        int k, double step) {
  const FactorSystem& system = enumerator.system();
  if (e >= system.index_count()) throw std::out_of_range("gibbs_derivative: index out of range");
  if (k < 0) throw std::invalid_argument("gibbs_derivative: k must be non-negative");
  auto value_at = [&](double du) {
    Realization shifted = r;
    shifted.chaos[e] += du / system.gamma;
    return enumerator.moments(shifted, MomentRequest::first_only()).first(e);
  };
  if (k == 0) return value_at(0.0);
  // k-th central difference: sum_j (-1)^j C(k, j) F(u + (k/2 - j) h) / h^k.
  double acc = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    acc += (j % 2 == 0 ? 1.0 : -1.0) * binom * value_at((0.5 * k - j) * step);
    binom = binom * double(k - j) / double(j + 1);
  }
  return acc / std::pow(step, k);
}

CkEstimate estimate_ck(const FactorSystem& system, int k, std::size_t n_disorder,
                       double grid_halfwidth, std::uint64_t master_seed, std::size_t grid_points) {
  if (k < 0 || k > 8) throw std::invalid_argument("estimate_ck: k must lie in [0, 8]");
  CkEstimate out;
  out.k = k;
  if (k <= 1) return out;  // |<f>| <= 1 and the inner variance of f is <= 1.
  if (n_disorder == 0) throw std::invalid_argument("estimate_ck: need at least one disorder draw");
  if (grid_points < 2 || !(grid_halfwidth > 0.0))
    throw std::invalid_argument("estimate_ck: grid needs >= 2 points and a positive half-width");

  const ExactEnumerator enumerator(system);
  const double h = 0.5 * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2));
  const std::size_t n_index = system.index_count();

  struct Draw {
    double max = 0.0;
    std::size_t evaluations = 0;
    std::string unstable;
  };
  const auto draws = parallel_map<Draw>(n_disorder, [&](std::size_t d) {
    Draw out;
    Realization r = draw_realization(system, {master_seed, d});
    for (std::size_t e = 0; e < n_index; ++e) {
      const double saved = r.chaos[e];
      for (std::size_t gi = 0; gi < grid_points; ++gi) {
        r.chaos[e] = -grid_halfwidth + 2.0 * grid_halfwidth * double(gi) / double(grid_points - 1);
        const double d1 = gibbs_derivative(enumerator, r, e, k, h);
        const double d2 = gibbs_derivative(enumerator, r, e, k, 2.0 * h);
        out.evaluations += 2 * std::size_t(k + 1);
        const double scale = std::max({std::abs(d1), std::abs(d2), 1e-3});
        if (std::abs(d1 - d2) > 0.05 * scale && out.unstable.empty()) {
          std::ostringstream msg;
          msg << "estimate_ck: finite differences unstable for k=" << k << " at index " << e
              << ", g=" << r.chaos[e] << " (step h: " << d1 << ", step 2h: " << d2 << ")";
          out.unstable = msg.str();
        }
        out.max = std::max(out.max, std::abs(d1));
      }
      r.chaos[e] = saved;
    }
    return out;
  });

  for (const Draw& d : draws) {
    if (!d.unstable.empty()) throw NonConvergenceError(d.unstable);
    out.observed_max = std::max(out.observed_max, d.max);
    out.evaluations += d.evaluations;
  }
  out.method = CkMethod::empirical;
  out.c_k = kCkSafetyFactor * out.observed_max;
  return out;
}

// ------------------------------------------------------------ experiments

Graph ModelParams::build_graph() const {
  if (graph) return *graph;
  if (!lattice.empty()) return lattice_graph(lattice, periodic);
  if (complete > 0) return complete_graph(complete);
  throw std::invalid_argument(std::string(to_string(family)) +
                              ": graph-based model needs a lattice, complete graph or graph file");
}

FactorSystem ModelParams::build(double strength, const SeedSpec& structure_seed) const {
  switch (family) {
    case ModelFamily::ea:
      return chaos == ChaosTerm::bonds ? make_ea(build_graph(), strength, h, chaos)
                                       : make_ea(build_graph(), beta, strength, chaos);
    case ModelFamily::rfim:
      return make_rfim(build_graph(), beta, strength, bond_sign);
    case ModelFamily::mixed_pspin: {
      std::map<int, double> all = betas;
      all[p] = strength;
      return make_mixed_pspin(n, all, p);
    }
    case ModelFamily::vector_sk: {
      std::vector<double> weights = nu;
      if (weights.empty()) weights.assign(points.size(), 1.0 / double(points.size()));
      return make_vector_sk(n, points, strength, weights);
    }
    case ModelFamily::diluted:
      if (p < 1) throw std::invalid_argument("diluted: clause arity p must be positive");
      return make_diluted(n, lambda, std::size_t(p), strength, structure_seed);
  }
  throw std::invalid_argument("unknown model family");
}

std::size_t ModelParams::site_count() const {
  switch (family) {
    case ModelFamily::ea:
    case ModelFamily::rfim: return build_graph().vertex_count();
    default: return n;
  }
}

Verdict BoundReport::recompute_verdict() const {
  if (verdict == Verdict::reference || verdict == Verdict::hypothesis_failed) return verdict;
  return lhs.value - kStderrSlack * lhs.stderr <= rhs ? Verdict::pass : Verdict::fail;
}

namespace {

WeightVector make_weights(const WeightSpec& spec, std::size_t n) {
  switch (spec.kind) {
    case WeightKind::uniform: return WeightVector::uniform(n);
    case WeightKind::ones: return WeightVector::ones(n);
    case WeightKind::random_signed: return WeightVector::random_signed(n, {spec.seed, 0});
    case WeightKind::explicit_values:
      if (spec.values.size() != n)
        throw std::invalid_argument("weights: expected " + std::to_string(n) + " values, got " +
                                    std::to_string(spec.values.size()));
      return WeightVector(spec.values);
  }
  throw std::invalid_argument("unknown weight kind");
}

void require_family(const ExperimentPoint& point, ModelFamily family) {
  if (point.model.family != family)
    throw std::invalid_argument(std::string(to_string(point.theorem)) + " needs the " +
                                std::string(to_string(family)) + " family, got " +
                                std::string(to_string(point.model.family)));
}

void require_sites(const ExperimentPoint& point, const FactorSystem& system) {
  if (system.indices().kind() != IndexKind::sites || !system.space->is_ising())
    throw std::invalid_argument(std::string(to_string(point.theorem)) +
                                " needs an Ising model whose chaos term is the site field");
}

std::string format_ck(const CkEstimate& ck) {
  std::ostringstream out;
  out << "C_" << ck.k << "=" << ck.c_k
      << (ck.method == CkMethod::analytic ? " (analytic)" : " (empirical, observed max ")
      ;
  if (ck.method == CkMethod::empirical) out << ck.observed_max << ")";
  return out.str();
}

}  // namespace

BoundReport run_theorem(const ExperimentPoint& point, const EngineChoice& engine,
                        std::size_t n_disorder, std::uint64_t master_seed) {
  const TheoremId id = point.theorem;
  BoundReport report;
  report.theorem = id;
  report.family = std::string(to_string(point.model.family));
  report.t = point.t;
  report.gamma1 = point.gamma1;
  report.gamma2 = point.gamma2;
  report.k = point.k;
  report.n_disorder = n_disorder;
  report.engine = engine.kind;

  BoundParameters params;
  params.gamma1 = point.gamma1;
  params.gamma2 = point.gamma2;
  params.t = point.t;

  switch (id) {
    case TheoremId::diluted_tail: {
      const double m = point.model.lambda * double(point.model.n);
      const DilutedTail tail = diluted_tail(m, n_disorder, {master_seed, 0});
      report.family = "poisson";
      report.e_size = static_cast<std::size_t>(std::llround(m));
      report.v_size = 0;
      report.t = 0.0;
      report.gamma1 = report.gamma2 = 0.0;
      report.engine = EngineKind::exact;
      report.lhs = {tail.mc_value, tail.stderr, n_disorder, EngineKind::exact};
      report.rhs = tail.analytic_cap;
      break;
    }

    case TheoremId::diluted: {
      require_family(point, ModelFamily::diluted);
      require_t(point.t, id);
      const ModelParams model = point.model;
      const double g1 = point.gamma1, g2 = point.gamma2, t = point.t;
      const PairSampler sampler = [model, g1, g2, t](const SeedSpec& seed) {
        const SeedSpec structure = derive(seed, domain::clauses);
        return couple(model.build(g1, structure), model.build(g2, structure), t, seed);
      };
      report.lhs = bond_overlap_variance(sampler, n_disorder, engine, master_seed);
      report.e_size = static_cast<std::size_t>(std::llround(model.lambda * double(model.n)));
      report.v_size = model.n;
      params.poisson_mean = model.lambda * double(model.n);
      report.rhs = rhs_family(id, params);
      break;
    }

    case TheoremId::thm2_1:
    case TheoremId::thm2_1_twotemp:
    case TheoremId::main1:
    case TheoremId::eqChatt1_ref:
    case TheoremId::mixed_pspin:
    case TheoremId::vector_sk:
    case TheoremId::ea_bond:
    case TheoremId::ea_site: {
      if (id == TheoremId::mixed_pspin) require_family(point, ModelFamily::mixed_pspin);
      if (id == TheoremId::vector_sk) require_family(point, ModelFamily::vector_sk);
      if (id == TheoremId::ea_bond || id == TheoremId::ea_site) {
        require_family(point, ModelFamily::ea);
        const ChaosTerm want = id == TheoremId::ea_bond ? ChaosTerm::bonds : ChaosTerm::field;
        if (point.model.chaos != want)
          throw std::invalid_argument(std::string(to_string(id)) + " needs chaos on the " +
                                      (want == ChaosTerm::bonds ? "bonds" : "field"));
      }
      if (point.model.family == ModelFamily::diluted)
        throw std::invalid_argument(std::string(to_string(id)) +
                                    ": the diluted family has its own theorem id");
      if (id == TheoremId::main1 && point.gamma1 != point.gamma2)
        throw std::invalid_argument("main1 needs equal strengths gamma1 = gamma2");
      if (id == TheoremId::eqChatt1_ref && point.gamma1 != point.gamma2)
        throw std::invalid_argument("eqChatt1_ref needs equal strengths gamma1 = gamma2");
      require_t(point.t, id);

      const FactorSystem first = point.model.build(point.gamma1);
      const FactorSystem second = point.model.build(point.gamma2);
      const CoupledPair pair = couple(first, second, point.t, {master_seed, 0});
      report.lhs = bond_overlap_variance(pair, n_disorder, engine, master_seed);
      report.e_size = first.index_count();
      report.v_size = first.site_count;

      params.e_size = double(first.index_count());
      params.v_size = double(first.site_count);
      params.n = double(first.site_count);
      if (id == TheoremId::thm2_1 || id == TheoremId::thm2_1_twotemp || id == TheoremId::main1 ||
          id == TheoremId::eqChatt1_ref) {
        // The generic statement is in the Gibbs coefficients gamma.
        params.gamma1 = first.gamma;
        params.gamma2 = second.gamma;
      }
      report.rhs = rhs_family(id, params);
      break;
    }

    case TheoremId::fkg_overlap: {
      const FactorSystem system = point.model.build(point.gamma1);
      require_sites(point, system);
      const FkgOverlap fkg = fkg_site_overlap(system, n_disorder, master_seed);
      report.lhs = fkg.overlap;
      report.e_size = system.index_count();
      report.v_size = system.site_count;
      report.worst_gap = fkg.worst_gap;
      params.gamma = system.gamma;
      params.v_size = double(system.site_count);
      report.rhs = rhs_family(id, params);
      std::ostringstream note;
      note << "worst_gap=" << fkg.worst_gap << " violating_draws=" << fkg.violating_draws;
      report.note = note.str();
      report.engine = EngineKind::exact;
      report.n_disorder = n_disorder;
      report.gamma2 = report.gamma1;
      report.slack = report.rhs - report.lhs.value;
      report.verdict = fkg.violating_draws > 0 ? Verdict::hypothesis_failed
                                               : report.recompute_verdict();
      return report;
    }

    case TheoremId::thm3_1:
    case TheoremId::thm5_1:
    case TheoremId::thm5_2:
    case TheoremId::thm5_3_ineq1:
    case TheoremId::thm5_3_ineq2:
    case TheoremId::eqlast:
    case TheoremId::eqlast2: {
      const FactorSystem system = point.model.build(point.gamma1);
      const bool normalized = id == TheoremId::eqlast || id == TheoremId::eqlast2;
      if (normalized) require_sites(point, system);
      const WeightVector weights = normalized ? WeightVector::uniform(system.index_count())
                                              : make_weights(point.weights, system.index_count());
      report.e_size = system.index_count();
      report.v_size = system.site_count;
      report.gamma2 = report.gamma1;

      int k = 1;
      if (id == TheoremId::thm3_1) k = 0;
      if (id == TheoremId::thm5_3_ineq1 || id == TheoremId::thm5_3_ineq2) k = point.k;
      report.k = k;
      report.lhs = k == 0 ? magnetization_variance(system, weights, n_disorder, engine, master_seed)
                          : field_variance(system, weights, k, n_disorder, engine, master_seed);

      params.gamma = system.gamma;
      params.norm1 = weights.norm1;
      params.norm2 = weights.norm2;
      params.k = k;
      params.v_size = double(system.site_count);
      if (id == TheoremId::thm5_3_ineq2) {
        CkEstimate ck;
        if (point.c_k) {
          ck.k = k;
          ck.c_k = *point.c_k;
          ck.method = k <= 1 ? CkMethod::analytic : CkMethod::empirical;
          ck.observed_max = *point.c_k;
        } else {
          ck = estimate_ck(system, k, std::min<std::size_t>(n_disorder, 8),
                           point.ck_grid_halfwidth, master_seed);
        }
        params.c_k = ck.c_k;
        report.ck = ck;
        report.note = format_ck(ck);
      }
      report.rhs = rhs_family(id, params);
      break;
    }
  }

  report.slack = report.rhs - report.lhs.value;
  report.verdict =
      id == TheoremId::eqChatt1_ref ? Verdict::reference : report.recompute_verdict();
  return report;
}

}  // namespace chaoslab
