#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chaoslab/gibbs.hpp"
#include "chaoslab/models.hpp"

namespace chaoslab {

/// Weights a_e over the index set with cached norms.
struct WeightVector {
  std::vector<double> a;
  double norm1 = 0.0;
  double norm2 = 0.0;

  explicit WeightVector(std::vector<double> values = {});
  static WeightVector uniform(std::size_t n);  // a_e = 1/n
  static WeightVector ones(std::size_t n);
  /// a_e = s_e u_e with s_e uniform in {-1, +1} and u_e uniform in (0, 1].
  static WeightVector random_signed(std::size_t n, const SeedSpec& seed);

  bool norms_consistent() const;
};

/// Disorder average of an inner (Gibbs) variance with its standard error
/// across disorder draws.
struct QuenchedVariance {
  double value = 0.0;
  double stderr = 0.0;
  std::size_t n_disorder = 0;
  EngineKind engine = EngineKind::exact;
};

// ---- per-realization assembly from single-system moment tables ----

/// <R^2> - <R>^2 for two replicas of the same system over the site family.
double site_overlap_inner(const MomentTable& sites);

/// sum_{e,e'} c_e c_e' (<f_e f_e'> - <f_e><f_e'>): inner variance of
/// sum_e c_e f_e(sigma).
double weighted_inner_variance(const MomentTable& moments, std::span<const double> c);

/// min over i != j of <s_i s_j> - <s_i><s_j>.
double covariance_floor(const MomentTable& sites);

// ---- quenched averages over disorder draws (stream_id = replica index) ----

using PairSampler = std::function<CoupledPair(const SeedSpec&)>;

/// Redraws only the Gaussians of `pair` for each replica.
PairSampler gaussian_redraw(const CoupledPair& pair);

/// Overlap statistics across disorder: the bounded quantity
/// E(<Q^2> - <Q>^2) plus the disorder spread of <Q11> as a diagnostic.
struct OverlapChaos {
  QuenchedVariance variance;
  double mean_overlap = 0.0;
  double overlap_disorder_variance = 0.0;
};

OverlapChaos bond_overlap_statistics(const PairSampler& sampler, std::size_t n_disorder,
                                     const EngineChoice& engine, std::uint64_t master_seed);

QuenchedVariance bond_overlap_variance(const CoupledPair& pair, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed);
QuenchedVariance bond_overlap_variance(const PairSampler& sampler, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed);

/// E(<R^2> - <R>^2) for the site overlap of two replicas of one system. The
/// chaos family must be the site family f_i = s_i of an Ising system.
QuenchedVariance site_overlap_variance(const FactorSystem& system, std::size_t n_disorder,
                                       const EngineChoice& engine, std::uint64_t master_seed);

/// E<(m - <m>)^2> for m(sigma) = sum_e a_e f_e(sigma).
QuenchedVariance magnetization_variance(const FactorSystem& system, const WeightVector& weights,
                                        std::size_t n_disorder, const EngineChoice& engine,
                                        std::uint64_t master_seed);

/// E(<W^2> - <W>^2) for W(sigma) = sum_e a_e H_k(g_e) f_e(sigma), where g_e
/// are the chaos couplings of the same realization. k = 0 is the
/// magnetization, k = 1 the plain random field.
QuenchedVariance field_variance(const FactorSystem& system, const WeightVector& weights, int k,
                                std::size_t n_disorder, const EngineChoice& engine,
                                std::uint64_t master_seed);

/// |gamma_1 sqrt(1-t) E<Q11^2 - Q11 Q21>| with the standard error of the
/// disorder mean (scaled by the same prefactor). Exact engine only.
Estimate intermediate_identity_check(const PairSampler& sampler, std::size_t n_disorder,
                                     std::uint64_t master_seed);
Estimate intermediate_identity_check(const CoupledPair& pair, std::size_t n_disorder,
                                     std::uint64_t master_seed);

/// Worst positive-correlation gap min_{i != j} <s_i s_j> - <s_i><s_j> for one
/// realization; >= -1e-10 certifies the FKG hypothesis numerically.
double fkg_check(const FactorSystem& system, const Realization& r);

/// Site-overlap variance together with the FKG gap over the same draws.
struct FkgOverlap {
  QuenchedVariance overlap;
  double worst_gap = 0.0;
  std::size_t violating_draws = 0;
};
inline constexpr double kFkgTolerance = 1e-10;
FkgOverlap fkg_site_overlap(const FactorSystem& system, std::size_t n_disorder,
                            std::uint64_t master_seed);

}  // namespace chaoslab
