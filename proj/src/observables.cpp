#include "chaoslab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "chaoslab/hermite.hpp"
#include "chaoslab/parallel.hpp"

namespace chaoslab {

namespace {

void require_draws(std::size_t n_disorder) {
  if (n_disorder < 2) throw std::invalid_argument("quenched average needs at least 2 disorder draws");
}

void require_site_family(const FactorSystem& system, const char* who) {
  if (system.indices().kind() != IndexKind::sites || !system.space->is_ising())
    throw std::invalid_argument(std::string(who) +
                                ": chaos term must be the Ising site family f_i = s_i");
}

QuenchedVariance summarize(const std::vector<double>& samples, EngineKind engine) {
  const RunningStats stats = tree_reduce(samples);
  return {stats.mean, stats.stderr_of_mean(), samples.size(), engine};
}

std::optional<ExactEnumerator> maybe_enumerator(const FactorSystem& system,
                                                const EngineChoice& engine) {
  if (engine.kind != EngineKind::exact) return std::nullopt;
  return ExactEnumerator(system);
}

// Shared driver for single-system quenched averages: `inner` maps one
// realization's moments to the per-draw value.
template <class Inner>
QuenchedVariance single_system_average(const FactorSystem& system, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed,
                                       const MomentRequest& request, Inner inner) {
  require_draws(n_disorder);
  const auto enumerator = maybe_enumerator(system, engine);
  const auto samples = parallel_map<double>(n_disorder, [&](std::size_t i) {
    const SeedSpec seed{master_seed, i};
    const Realization r = draw_realization(system, seed);
    const MomentTable m = compute_moments(system, r, request, engine, derive(seed, 0),
                                          enumerator ? &*enumerator : nullptr);
    return inner(m, r);
  });
  return summarize(samples, engine.kind);
}

struct PairMoments {
  MomentTable first;
  MomentTable second;
  CoupledPair pair;
};

PairMoments pair_moments(const PairSampler& sampler, const SeedSpec& seed,
                         const EngineChoice& engine, const ExactEnumerator* e1,
                         const ExactEnumerator* e2) {
  CoupledPair pair = sampler(seed);
  MomentTable m1, m2;
  if (pair.first.index_count() > 0) {
    m1 = compute_moments(pair.first, pair.realization_first(), MomentRequest::all(), engine,
                         derive(seed, 1), e1);
    m2 = compute_moments(pair.second, pair.realization_second(), MomentRequest::all(), engine,
                         derive(seed, 2), e2);
  }
  return {std::move(m1), std::move(m2), std::move(pair)};
}

OverlapChaos overlap_statistics(const PairSampler& sampler, std::size_t n_disorder,
                                const EngineChoice& engine, std::uint64_t master_seed,
                                const ExactEnumerator* e1, const ExactEnumerator* e2) {
  require_draws(n_disorder);
  std::vector<double> inner(n_disorder), overlap(n_disorder);
  parallel_for(n_disorder, [&](std::size_t i) {
    const PairMoments pm = pair_moments(sampler, {master_seed, i}, engine, e1, e2);
    const OverlapMoments om = overlap_moments(pm.first, pm.second);
    inner[i] = om.q2 - om.q * om.q;
    overlap[i] = om.q;
  });
  const RunningStats q_stats = tree_reduce(overlap);
  return {summarize(inner, engine.kind), q_stats.mean, q_stats.variance()};
}

Estimate identity_statistics(const PairSampler& sampler, std::size_t n_disorder,
                             std::uint64_t master_seed, const ExactEnumerator* e1,
                             const ExactEnumerator* e2) {
  require_draws(n_disorder);
  std::vector<double> diff(n_disorder);
  std::vector<double> prefactor(n_disorder);
  parallel_for(n_disorder, [&](std::size_t i) {
    const PairMoments pm = pair_moments(sampler, {master_seed, i}, EngineChoice::exact(), e1, e2);
    const OverlapMoments om = overlap_moments(pm.first, pm.second);
    diff[i] = om.q2 - om.q11q21;
    prefactor[i] = pm.pair.first.gamma * std::sqrt(1.0 - pm.pair.t);
  });
  const RunningStats stats = tree_reduce(diff);
  const double c = prefactor.front();
  return {std::abs(c * stats.mean), c * stats.stderr_of_mean()};
}

}  // namespace

// ------------------------------------------------------------- weights

WeightVector::WeightVector(std::vector<double> values) : a(std::move(values)) {
  for (double x : a) {
    norm1 += std::abs(x);
    norm2 += x * x;
  }
  norm2 = std::sqrt(norm2);
}

WeightVector WeightVector::uniform(std::size_t n) {
  return WeightVector(std::vector<double>(n, n == 0 ? 0.0 : 1.0 / double(n)));
}

WeightVector WeightVector::ones(std::size_t n) { return WeightVector(std::vector<double>(n, 1.0)); }

WeightVector WeightVector::random_signed(std::size_t n, const SeedSpec& seed) {
  Engine engine = make_engine(seed, domain::weights);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> a(n);
  for (double& x : a) {
    const double sign = unit(engine) < 0.5 ? -1.0 : 1.0;
    x = sign * (1.0 - unit(engine));
  }
  return WeightVector(std::move(a));
}

bool WeightVector::norms_consistent() const {
  const WeightVector fresh(a);
  return std::abs(fresh.norm1 - norm1) <= 1e-12 && std::abs(fresh.norm2 - norm2) <= 1e-12;
}

// ------------------------------------------------- per-realization assembly

double site_overlap_inner(const MomentTable& sites) {
  const std::size_t n = sites.index_count();
  if (n == 0) return 0.0;
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) r += sites.first(i) * sites.first(i);
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double s = sites.second(i, j);
      r2 += (i == j ? 1.0 : 2.0) * s * s;
    }
  const double inv = 1.0 / double(n);
  r *= inv;
  r2 *= inv * inv;
  return r2 - r * r;
}

double weighted_inner_variance(const MomentTable& moments, std::span<const double> c) {
  const std::size_t n = moments.index_count();
  if (c.size() != n) throw std::invalid_argument("weighted variance: weight count mismatch");
  double acc = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    if (c[e] == 0.0) continue;
    for (std::size_t f = e; f < n; ++f) {
      if (c[f] == 0.0) continue;
      const double cov = moments.second(e, f) - moments.first(e) * moments.first(f);
      acc += (e == f ? 1.0 : 2.0) * c[e] * c[f] * cov;
    }
  }
  return acc;
}

double covariance_floor(const MomentTable& sites) {
  double worst = std::numeric_limits<double>::infinity();
  const std::size_t n = sites.index_count();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i == j && n > 1) continue;
      worst = std::min(worst, sites.second(i, j) - sites.first(i) * sites.first(j));
    }
  return worst;
}

// ------------------------------------------------------ quenched averages

PairSampler gaussian_redraw(const CoupledPair& pair) {
  return [pair](const SeedSpec& seed) { return redraw(pair, seed); };
}

OverlapChaos bond_overlap_statistics(const PairSampler& sampler, std::size_t n_disorder,
                                     const EngineChoice& engine, std::uint64_t master_seed) {
  return overlap_statistics(sampler, n_disorder, engine, master_seed, nullptr, nullptr);
}

QuenchedVariance bond_overlap_variance(const PairSampler& sampler, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed) {
  return bond_overlap_statistics(sampler, n_disorder, engine, master_seed).variance;
}

QuenchedVariance bond_overlap_variance(const CoupledPair& pair, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed) {
  const auto e1 = maybe_enumerator(pair.first, engine);
  const auto e2 = maybe_enumerator(pair.second, engine);
  return overlap_statistics(gaussian_redraw(pair), n_disorder, engine, master_seed,
                            e1 ? &*e1 : nullptr, e2 ? &*e2 : nullptr)
      .variance;
}

QuenchedVariance site_overlap_variance(const FactorSystem& system, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed) {
  require_site_family(system, "site_overlap_variance");
  return single_system_average(system, n_disorder, engine, master_seed, MomentRequest::all(),
                               [](const MomentTable& m, const Realization&) {
                                 return site_overlap_inner(m);
                               });
}

QuenchedVariance magnetization_variance(const FactorSystem& system, const WeightVector& weights,
                                        std::size_t n_disorder, const EngineChoice& engine,
                                        std::uint64_t master_seed) {
  if (weights.a.size() != system.index_count())
    throw std::invalid_argument("magnetization_variance: weights must be indexed by E");
  return single_system_average(system, n_disorder, engine, master_seed, MomentRequest::all(),
                               [&](const MomentTable& m, const Realization&) {
                                 return weighted_inner_variance(m, weights.a);
                               });
}

QuenchedVariance field_variance(const FactorSystem& system, const WeightVector& weights, int k,
                                std::size_t n_disorder, const EngineChoice& engine,
                                std::uint64_t master_seed) {
  if (k < 0 || k > 8) throw std::invalid_argument("field_variance: k must lie in [0, 8]");
  if (weights.a.size() != system.index_count())
    throw std::invalid_argument("field_variance: weights must be indexed by E");
  return single_system_average(
      system, n_disorder, engine, master_seed, MomentRequest::all(),
      [&](const MomentTable& m, const Realization& r) {
        std::vector<double> c(weights.a.size());
        for (std::size_t e = 0; e < c.size(); ++e) c[e] = weights.a[e] * hermite(k, r.chaos[e]);
        return weighted_inner_variance(m, c);
      });
}

Estimate intermediate_identity_check(const PairSampler& sampler, std::size_t n_disorder,
                                     std::uint64_t master_seed) {
  return identity_statistics(sampler, n_disorder, master_seed, nullptr, nullptr);
}

Estimate intermediate_identity_check(const CoupledPair& pair, std::size_t n_disorder,
                                     std::uint64_t master_seed) {
  const ExactEnumerator e1(pair.first);
  const ExactEnumerator e2(pair.second);
  return identity_statistics(gaussian_redraw(pair), n_disorder, master_seed, &e1, &e2);
}

double fkg_check(const FactorSystem& system, const Realization& r) {
  require_site_family(system, "fkg_check");
  return covariance_floor(exact_moments(system, r, MomentRequest::all()));
}

FkgOverlap fkg_site_overlap(const FactorSystem& system, std::size_t n_disorder,
                            std::uint64_t master_seed) {
  require_site_family(system, "fkg_site_overlap");
  require_draws(n_disorder);
  const ExactEnumerator enumerator(system);
  std::vector<double> inner(n_disorder), gaps(n_disorder);
  parallel_for(n_disorder, [&](std::size_t i) {
    const Realization r = draw_realization(system, {master_seed, i});
    const MomentTable m = enumerator.moments(r, MomentRequest::all());
    inner[i] = site_overlap_inner(m);
    gaps[i] = covariance_floor(m);
  });
  FkgOverlap out;
  out.overlap = summarize(inner, EngineKind::exact);
  out.worst_gap = *std::min_element(gaps.begin(), gaps.end());
  out.violating_draws = static_cast<std::size_t>(
      std::count_if(gaps.begin(), gaps.end(), [](double g) { return g < -kFkgTolerance; }));
  return out;
}

}  // namespace chaoslab
