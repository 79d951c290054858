#include "chaoslab/models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace chaoslab {

namespace {

constexpr std::size_t kMaxArity = 32;

std::shared_ptr<const LocalSpace> ising_space() {
  static const auto space = std::make_shared<const LocalSpace>(LocalSpace::ising());
  return space;
}

SeedSpec residual_seed(const SeedSpec& seed, std::size_t term) {
  return {splitmix64(seed.master_seed + domain::residual_base + term), seed.stream_id};
}

CoupledDisorder coupled_or_empty(std::size_t n, double t, const SeedSpec& seed) {
  if (n > 0) return sample_coupled(n, t, seed);
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("couple: t must lie in [0, 1]");
  CoupledDisorder d;
  d.t = t;
  return d;
}

}  // namespace

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::ea: return "ea";
    case ModelFamily::rfim: return "rfim";
    case ModelFamily::mixed_pspin: return "mixed_pspin";
    case ModelFamily::vector_sk: return "vector_sk";
    case ModelFamily::diluted: return "diluted";
  }
  return "unknown";
}

bool LocalSpace::is_ising() const noexcept {
  return dim == 1 && state_count() == 2 && points[0] == -1.0 && points[1] == 1.0;
}

LocalSpace LocalSpace::ising() {
  LocalSpace s;
  s.dim = 1;
  s.points = {-1.0, 1.0};
  s.weights = {0.5, 0.5};
  s.log_weights = {std::log(0.5), std::log(0.5)};
  return s;
}

LocalSpace LocalSpace::vectors(const std::vector<std::vector<double>>& points,
                               const std::vector<double>& nu) {
  if (points.empty()) throw std::invalid_argument("vector spins: S must be non-empty");
  const std::size_t d = points.front().size();
  if (d == 0) throw std::invalid_argument("vector spins: points need at least one coordinate");
  for (const auto& p : points)
    if (p.size() != d) throw std::invalid_argument("vector spins: points differ in dimension");
  if (nu.size() != points.size())
    throw std::invalid_argument("vector spins: nu must have one weight per point");
  double total = 0.0;
  for (double w : nu) {
    if (!(w >= 0.0)) throw std::invalid_argument("vector spins: nu must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("vector spins: nu must sum to one");

  double max_dot = 0.0;
  for (const auto& a : points)
    for (const auto& b : points)
      max_dot = std::max(max_dot, std::abs(std::inner_product(a.begin(), a.end(), b.begin(), 0.0)));

  LocalSpace s;
  s.dim = d;
  s.scale = max_dot > 1.0 ? 1.0 / std::sqrt(max_dot) : 1.0;
  for (const auto& p : points)
    for (double x : p) s.points.push_back(x * s.scale);
  s.weights = nu;
  for (double w : nu) s.log_weights.push_back(std::log(w));
  return s;
}

FactorFamily::FactorFamily(IndexFamily indices, FactorKind kind,
                           std::shared_ptr<const LocalSpace> space)
    : indices_(std::move(indices)), kind_(kind), space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("factor family needs a state space");
  if (indices_.arity() > kMaxArity) throw std::invalid_argument("factor arity above 32");
  if (kind_ == FactorKind::spin_product && space_->dim != 1)
    throw std::invalid_argument("spin-product factors need scalar spins");
  if (kind_ == FactorKind::scalar_product && indices_.arity() != 2)
    throw std::invalid_argument("scalar-product factors need pairs");
}

double FactorFamily::value(std::size_t e, Spins states) const {
  std::array<std::uint32_t, kMaxArity> sites{};
  const std::size_t arity = indices_.arity();
  indices_.tuple(e, std::span(sites.data(), arity));
  if (kind_ == FactorKind::spin_product) {
    double v = 1.0;
    for (std::size_t k = 0; k < arity; ++k) v *= space_->points[states[sites[k]]];
    return v;
  }
  const auto a = space_->point(states[sites[0]]);
  const auto b = space_->point(states[sites[1]]);
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void FactorFamily::support(std::size_t e, std::vector<std::uint32_t>& out) const {
  out.resize(indices_.arity());
  indices_.tuple(e, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

bool FactorSystem::has_gaussian_residual() const noexcept {
  return std::any_of(residual.begin(), residual.end(),
                     [](const ResidualTerm& r) { return r.law == CouplingLaw::gaussian; });
}

Realization make_realization(const FactorSystem& system, std::vector<double> chaos,
                             std::vector<std::vector<double>> gaussian_residual) {
  if (chaos.size() != system.index_count())
    throw std::invalid_argument("realization: expected " + std::to_string(system.index_count()) +
                                " chaos couplings, got " + std::to_string(chaos.size()));
  Realization r;
  r.chaos = std::move(chaos);
  std::size_t next = 0;
  for (const ResidualTerm& term : system.residual) {
    if (term.law == CouplingLaw::fixed) {
      r.residual.push_back(term.couplings);
      continue;
    }
    if (next >= gaussian_residual.size())
      throw std::invalid_argument("realization: missing couplings for a Gaussian residual term");
    if (gaussian_residual[next].size() != term.factors.size())
      throw std::invalid_argument("realization: residual coupling count mismatch");
    r.residual.push_back(std::move(gaussian_residual[next++]));
  }
  return r;
}

Realization draw_realization(const FactorSystem& system, const SeedSpec& seed) {
  std::vector<std::vector<double>> gaussian;
  for (std::size_t k = 0; k < system.residual.size(); ++k) {
    const ResidualTerm& term = system.residual[k];
    if (term.law == CouplingLaw::gaussian)
      gaussian.push_back(sample_gaussians(term.factors.size(), seed, domain::residual_base + k));
  }
  return make_realization(system,
                          sample_gaussians(system.index_count(), seed, domain::single_disorder),
                          std::move(gaussian));
}

double chaos_field(const FactorSystem& system, std::span<const double> g, Spins states) {
  double y = 0.0;
  for (std::size_t e = 0; e < system.index_count(); ++e) y += g[e] * system.bond(e, states);
  return y;
}

double log_weight(const FactorSystem& system, const Realization& r, Spins states) {
  double lw = 0.0;
  for (std::uint32_t s : states) lw += system.space->log_weights[s];
  lw += system.gamma * chaos_field(system, r.chaos, states);
  for (std::size_t k = 0; k < system.residual.size(); ++k) {
    const ResidualTerm& term = system.residual[k];
    double acc = 0.0;
    for (std::size_t e = 0; e < term.factors.size(); ++e)
      acc += r.residual[k][e] * term.factors.value(e, states);
    lw += term.strength * acc;
  }
  return lw;
}

FactorSystem make_ea(const Graph& graph, double beta, double h, ChaosTerm chaos) {
  if (!(beta > 0.0)) throw std::invalid_argument("make_ea: beta must be positive");
  if (!(h >= 0.0)) throw std::invalid_argument("make_ea: h must be non-negative");
  auto space = ising_space();
  FactorFamily bonds(IndexFamily::from_graph(graph), FactorKind::spin_product, space);
  FactorFamily field(IndexFamily::sites(graph.vertex_count()), FactorKind::spin_product, space);

  if (chaos == ChaosTerm::bonds) {
    FactorSystem s{ModelFamily::ea, graph.vertex_count(), space, std::move(bonds), beta, {}};
    if (h > 0.0) s.residual.push_back({std::move(field), h, CouplingLaw::gaussian, {}});
    return s;
  }
  if (!(h > 0.0)) throw std::invalid_argument("make_ea: field chaos needs h > 0");
  FactorSystem s{ModelFamily::ea, graph.vertex_count(), space, std::move(field), h, {}};
  if (graph.edge_count() > 0)
    s.residual.push_back({std::move(bonds), beta, CouplingLaw::gaussian, {}});
  return s;
}

FactorSystem make_rfim(const Graph& graph, double beta, double h, double bond_sign) {
  if (!(beta >= 0.0)) throw std::invalid_argument("make_rfim: beta must be non-negative");
  if (!(h > 0.0)) throw std::invalid_argument("make_rfim: h must be positive");
  auto space = ising_space();
  FactorSystem s{ModelFamily::rfim, graph.vertex_count(), space,
                 FactorFamily(IndexFamily::sites(graph.vertex_count()), FactorKind::spin_product,
                              space),
                 h, {}};
  if (graph.edge_count() > 0 && beta > 0.0) {
    FactorFamily bonds(IndexFamily::from_graph(graph), FactorKind::spin_product, space);
    std::vector<double> couplings(bonds.size(), bond_sign);
    s.residual.push_back({std::move(bonds), beta, CouplingLaw::fixed, std::move(couplings)});
  }
  return s;
}

FactorSystem make_mixed_pspin(std::size_t n, const std::map<int, double>& betas, int chaos_p) {
  if (n == 0) throw std::invalid_argument("make_mixed_pspin: N must be positive");
  const auto it = betas.find(chaos_p);
  if (it == betas.end())
    throw std::invalid_argument("make_mixed_pspin: chaos p=" + std::to_string(chaos_p) +
                                " has no beta");
  if (!(it->second > 0.0)) throw std::invalid_argument("make_mixed_pspin: chaos beta must be positive");
  auto space = ising_space();
  auto scaled = [n](int p, double beta) {
    return beta / std::pow(double(n), 0.5 * double(p - 1));
  };
  FactorSystem s{ModelFamily::mixed_pspin, n, space,
                 FactorFamily(IndexFamily::p_tuples(n, std::size_t(chaos_p)),
                              FactorKind::spin_product, space),
                 scaled(chaos_p, it->second), {}};
  for (const auto& [p, beta] : betas) {
    if (p < 1) throw std::invalid_argument("make_mixed_pspin: p must be positive");
    if (beta < 0.0) throw std::invalid_argument("make_mixed_pspin: betas must be non-negative");
    if (p == chaos_p || beta == 0.0) continue;
    s.residual.push_back({FactorFamily(IndexFamily::p_tuples(n, std::size_t(p)),
                                       FactorKind::spin_product, space),
                          scaled(p, beta), CouplingLaw::gaussian, {}});
  }
  return s;
}

FactorSystem make_vector_sk(std::size_t n, const std::vector<std::vector<double>>& points,
                            double beta, const std::vector<double>& nu) {
  if (n == 0) throw std::invalid_argument("make_vector_sk: N must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("make_vector_sk: beta must be positive");
  auto space = std::make_shared<const LocalSpace>(LocalSpace::vectors(points, nu));
  return {ModelFamily::vector_sk, n, space,
          FactorFamily(IndexFamily::p_tuples(n, 2), FactorKind::scalar_product, space),
          beta / std::sqrt(double(n)), {}};
}

FactorSystem make_diluted(IndexFamily clauses, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("make_diluted: beta must be positive");
  auto space = ising_space();
  const std::size_t n = clauses.site_count();
  return {ModelFamily::diluted, n, space,
          FactorFamily(std::move(clauses), FactorKind::spin_product, space), beta, {}};
}

FactorSystem make_diluted(std::size_t n, double lambda, std::size_t p, double beta,
                          const SeedSpec& seed) {
  return make_diluted(diluted_clauses(n, lambda, p, seed), beta);
}

Realization CoupledPair::realization_first() const {
  std::vector<std::vector<double>> res;
  for (const auto& d : residual_disorder) res.push_back(d.g1);
  return make_realization(first, disorder.g1, std::move(res));
}

Realization CoupledPair::realization_second() const {
  std::vector<std::vector<double>> res;
  for (const auto& d : residual_disorder) res.push_back(d.g2);
  return make_realization(second, disorder.g2, std::move(res));
}

CoupledPair couple(const FactorSystem& a, const FactorSystem& b, double t, const SeedSpec& seed,
                   std::optional<double> residual_t) {
  if (a.family != b.family) throw std::invalid_argument("couple: model families differ");
  if (!(a.factors == b.factors)) throw std::invalid_argument("couple: factor families differ");
  if (a.site_count != b.site_count) throw std::invalid_argument("couple: site counts differ");
  if (a.space->points != b.space->points || a.space->weights != b.space->weights)
    throw std::invalid_argument("couple: state spaces differ");
  if (a.residual.size() != b.residual.size())
    throw std::invalid_argument("couple: residual structures differ");
  for (std::size_t k = 0; k < a.residual.size(); ++k) {
    if (!(a.residual[k].factors == b.residual[k].factors) || a.residual[k].law != b.residual[k].law)
      throw std::invalid_argument("couple: residual structures differ");
  }

  CoupledPair pair{a, b, t, residual_t.value_or(t), {}, {}};
  pair.disorder = coupled_or_empty(a.index_count(), t, seed);
  for (std::size_t k = 0; k < a.residual.size(); ++k) {
    if (a.residual[k].law != CouplingLaw::gaussian) continue;
    pair.residual_disorder.push_back(
        coupled_or_empty(a.residual[k].factors.size(), pair.residual_t, residual_seed(seed, k)));
  }
  return pair;
}

CoupledPair redraw(const CoupledPair& pair, const SeedSpec& seed) {
  return couple(pair.first, pair.second, pair.t, seed, pair.residual_t);
}

}  // namespace chaoslab
