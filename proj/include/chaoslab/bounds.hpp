#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaoslab/gibbs.hpp"
#include "chaoslab/models.hpp"
#include "chaoslab/observables.hpp"
#include "chaoslab/topology.hpp"

namespace chaoslab {

enum class TheoremId {
  thm2_1,
  thm2_1_twotemp,
  main1,
  eqChatt1_ref,
  mixed_pspin,
  vector_sk,
  diluted,
  ea_bond,
  ea_site,
  thm3_1,
  fkg_overlap,
  thm5_1,
  thm5_2,
  thm5_3_ineq1,
  thm5_3_ineq2,
  eqlast,
  eqlast2,
  diluted_tail,
};

std::string_view to_string(TheoremId id);
std::optional<TheoremId> parse_theorem(std::string_view name);
const std::vector<TheoremId>& all_theorems();

enum class Verdict { pass, fail, hypothesis_failed, reference };
std::string_view to_string(Verdict v);

// ---- right-hand sides ----

/// 4 (g1 + g2) / (g1 g2 sqrt(|E| (1 - t))). Rejects t >= 1.
double rhs_thm2_1(double gamma1, double gamma2, std::size_t e_size, double t);

/// Comparison value 2 sqrt(2) / (beta t^{1/4} sqrt(|E| log(1/t))) for 0 < t < 1;
/// +infinity once t > 1 - 1e-12.
double rhs_reference_chaos(double beta, std::size_t e_size, double t);

/// Named inputs for rhs_family; each theorem reads only what it needs and
/// reports the missing ones by name.
struct BoundParameters {
  std::optional<double> gamma1, gamma2;  // natural strengths (beta, h, beta_p)
  std::optional<double> gamma;           // single-system coefficient
  std::optional<double> t;
  std::optional<double> e_size, v_size, n;
  std::optional<double> norm1, norm2;
  std::optional<int> k;
  std::optional<double> c_k;
  std::optional<double> poisson_mean;  // lambda * N for the diluted bound
};

double rhs_family(TheoremId id, const BoundParameters& params);

/// E[pi^{-1/2} 1(pi >= 1)] for pi ~ Poisson(mean), by direct series summation.
double poisson_inverse_sqrt_mean(double mean);

struct DilutedTail {
  double mc_value = 0.0;
  double stderr = 0.0;
  double analytic_cap = 0.0;
};

/// Monte Carlo E[pi^{-1/2} 1(pi >= 1)] and the cap 1/(sqrt(m) - sqrt(2/m)).
/// Rejects m = lambda N <= sqrt(2), where the cap is not positive.
DilutedTail diluted_tail(double lambda_n, std::size_t n_draws, const SeedSpec& seed);

enum class CkMethod { analytic, empirical };

struct CkEstimate {
  int k = 0;
  double c_k = 1.0;
  double observed_max = 0.0;
  CkMethod method = CkMethod::analytic;
  std::size_t evaluations = 0;
};

inline constexpr double kCkSafetyFactor = 1.5;

/// Bound C_k on |F_e^(k)| = |gamma^-k d^k<f_e>/dg_e^k|. k = 0, 1 are
/// analytic (C = 1). For k >= 2 the derivative is taken in u = gamma g_e by
/// central differences with step 0.5 eps^{1/(k+2)}, maximized over disorder
/// draws and a grid of g_e in [-grid_halfwidth, grid_halfwidth], then
/// inflated by kCkSafetyFactor. Throws NonConvergenceError when the step-h
/// and step-2h estimates disagree by more than 5%.
CkEstimate estimate_ck(const FactorSystem& system, int k, std::size_t n_disorder,
                       double grid_halfwidth, std::uint64_t master_seed,
                       std::size_t grid_points = 41);

/// k-th derivative of <f_e> with respect to u = gamma g_e at realization r.
/// Exposed for tests.
double gibbs_derivative(const ExactEnumerator& enumerator, const Realization& r, std::size_t e,
                        int k, double step);

// ---- experiments ----

enum class WeightKind { uniform, ones, random_signed, explicit_values };

struct WeightSpec {
  WeightKind kind = WeightKind::uniform;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

/// Structural description of a model family. The chaos strengths and t of a
/// given experiment point live in ExperimentPoint.
struct ModelParams {
  ModelFamily family = ModelFamily::ea;

  // Graph-based families: one of lattice / complete / graph.
  std::vector<std::size_t> lattice;
  bool periodic = false;
  std::size_t complete = 0;
  std::optional<Graph> graph;

  ChaosTerm chaos = ChaosTerm::bonds;  // ea only
  double beta = 1.0;       // residual bond strength (ea field chaos, rfim)
  double h = 0.0;          // residual field strength (ea bond chaos)
  double bond_sign = 1.0;  // rfim

  std::size_t n = 0;            // mixed_pspin, vector_sk, diluted
  std::map<int, double> betas;  // mixed_pspin: residual p terms
  int p = 2;                    // mixed_pspin chaos p, diluted clause arity
  double lambda = 1.0;          // diluted
  std::vector<std::vector<double>> points;  // vector_sk S
  std::vector<double> nu;                   // vector_sk weights (empty = uniform)

  Graph build_graph() const;
  /// One system with the chaos term at natural strength `strength`.
  FactorSystem build(double strength, const SeedSpec& structure_seed = {}) const;
  std::size_t site_count() const;
};

struct ExperimentPoint {
  TheoremId theorem = TheoremId::thm2_1;
  ModelParams model;
  double gamma1 = 1.0;  // natural chaos strength of system 1 (single system: the only one)
  double gamma2 = 1.0;
  double t = 0.0;
  int k = 1;
  WeightSpec weights;
  std::optional<double> c_k;  // overrides the estimate for thm5_3_ineq2
  double ck_grid_halfwidth = 4.0;
};

struct BoundReport {
  TheoremId theorem = TheoremId::thm2_1;
  std::string family;
  std::size_t e_size = 0;
  std::size_t v_size = 0;
  double t = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int k = 0;
  std::size_t n_disorder = 0;
  EngineKind engine = EngineKind::exact;
  QuenchedVariance lhs;
  double rhs = 0.0;
  double slack = 0.0;
  Verdict verdict = Verdict::pass;
  std::optional<double> worst_gap;
  std::optional<CkEstimate> ck;
  std::string note;

  /// pass iff lhs - 3 stderr <= rhs (reference and hypothesis_failed kept).
  Verdict recompute_verdict() const;
};

inline constexpr double kStderrSlack = 3.0;

BoundReport run_theorem(const ExperimentPoint& point, const EngineChoice& engine,
                        std::size_t n_disorder, std::uint64_t master_seed);

}  // namespace chaoslab
