#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chaoslab/disorder.hpp"
#include "chaoslab/seed.hpp"
#include "chaoslab/topology.hpp"

namespace chaoslab {

/// Finite single-site state space S in R^d with a reference probability
/// vector nu. Ising spins are S = {-1, +1} with d = 1 and uniform nu.
struct LocalSpace {
  std::size_t dim = 1;
  std::vector<double> points;   // state_count() x dim, row-major
  std::vector<double> weights;  // nu, sums to one
  std::vector<double> log_weights;
  /// Factor applied to the caller's points so that every scalar product
  /// lies in [-1, 1]; 1 when no rescaling was needed.
  double scale = 1.0;

  std::size_t state_count() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t s) const noexcept {
    return {points.data() + s * dim, dim};
  }
  bool is_ising() const noexcept;

  static LocalSpace ising();
  /// Rescales when some |(a, b)| > 1. Rejects empty S, ragged points and nu
  /// that is negative or does not sum to one.
  static LocalSpace vectors(const std::vector<std::vector<double>>& points,
                            const std::vector<double>& nu);
};

/// One state index per site, indexing into the system's LocalSpace.
using SpinConfiguration = std::vector<std::uint32_t>;
using Spins = std::span<const std::uint32_t>;

enum class FactorKind {
  spin_product,    // f_e = product of the (scalar) spins in tuple(e)
  scalar_product,  // f_e = (sigma_i, sigma_j) for tuple(e) = (i, j)
};

/// The bond functions f_e : Sigma -> [-1, 1] over an index family.
class FactorFamily {
 public:
  FactorFamily(IndexFamily indices, FactorKind kind, std::shared_ptr<const LocalSpace> space);

  std::size_t size() const noexcept { return indices_.cardinality(); }
  const IndexFamily& indices() const noexcept { return indices_; }
  FactorKind kind() const noexcept { return kind_; }

  double value(std::size_t e, Spins states) const;
  /// Distinct sites touched by factor e.
  void support(std::size_t e, std::vector<std::uint32_t>& out) const;

  friend bool operator==(const FactorFamily& a, const FactorFamily& b) {
    return a.kind_ == b.kind_ && a.indices_ == b.indices_;
  }

 private:
  IndexFamily indices_;
  FactorKind kind_;
  std::shared_ptr<const LocalSpace> space_;
};

enum class ModelFamily { ea, rfim, mixed_pspin, vector_sk, diluted };
std::string_view to_string(ModelFamily family);

enum class CouplingLaw { gaussian, fixed };

/// A term of the reference measure: strength * sum_k J_k f_k(sigma). Gaussian
/// terms draw fresh J per disorder realization from streams independent of
/// the chaos-term Gaussians; fixed terms use `couplings`.
struct ResidualTerm {
  FactorFamily factors;
  double strength = 0.0;
  CouplingLaw law = CouplingLaw::gaussian;
  std::vector<double> couplings;
};

/// Gibbs measure dG ∝ exp(gamma * Y(sigma)) dmu(sigma) with
/// Y(sigma) = sum_e g_e f_e(sigma) and mu = nu^N reweighted by the residual
/// terms.
struct FactorSystem {
  ModelFamily family = ModelFamily::ea;
  std::size_t site_count = 0;
  std::shared_ptr<const LocalSpace> space;
  FactorFamily factors;
  double gamma = 1.0;
  std::vector<ResidualTerm> residual;

  std::size_t index_count() const noexcept { return factors.size(); }
  const IndexFamily& indices() const noexcept { return factors.indices(); }
  double bond(std::size_t e, Spins states) const { return factors.value(e, states); }
  bool has_gaussian_residual() const noexcept;
};

/// Everything random in one system's Gibbs measure for one draw: chaos
/// couplings g_e and one coupling vector per residual term.
struct Realization {
  std::vector<double> chaos;
  std::vector<std::vector<double>> residual;
};

/// Builds a realization from chaos couplings; fixed residual terms are filled
/// in, Gaussian residual terms take `gaussian_residual` in order.
Realization make_realization(const FactorSystem& system, std::vector<double> chaos,
                             std::vector<std::vector<double>> gaussian_residual = {});

/// Fresh independent draw of all Gaussians of one system.
Realization draw_realization(const FactorSystem& system, const SeedSpec& seed);

/// Y(sigma) = sum_e g_e f_e(sigma).
double chaos_field(const FactorSystem& system, std::span<const double> g, Spins states);
/// log of the unnormalized Gibbs weight: gamma Y + residual terms + log nu.
double log_weight(const FactorSystem& system, const Realization& r, Spins states);

enum class ChaosTerm { bonds, field };

/// Edwards-Anderson model sum_{(i,j)} beta g_ij s_i s_j + h sum_i g_i s_i.
/// `chaos` selects which family carries the chaos analysis; the other one (if
/// its strength is positive) becomes a Gaussian residual term.
FactorSystem make_ea(const Graph& graph, double beta, double h,
                     ChaosTerm chaos = ChaosTerm::bonds);

/// Random field model beta * bond_sign * sum_{i~j} s_i s_j + h sum_i g_i s_i.
/// Chaos term is the field (gamma = h); bonds are fixed couplings.
FactorSystem make_rfim(const Graph& graph, double beta, double h, double bond_sign = 1.0);

/// Mixed p-spin with finitely many terms. The chaos_p term is the chaos family
/// with gamma = beta_p / N^{(p-1)/2}; every other term is a Gaussian residual.
FactorSystem make_mixed_pspin(std::size_t n, const std::map<int, double>& betas, int chaos_p);

/// SK model with spins in a finite S in R^d, factors (sigma_i, sigma_j) over
/// all N^2 ordered pairs, gamma = beta / sqrt(N), reference measure nu^N.
FactorSystem make_vector_sk(std::size_t n, const std::vector<std::vector<double>>& points,
                            double beta, const std::vector<double>& nu);

FactorSystem make_diluted(std::size_t n, double lambda, std::size_t p, double beta,
                          const SeedSpec& seed);
FactorSystem make_diluted(IndexFamily clauses, double beta);

/// Two systems over the same factors with correlated chaos couplings.
struct CoupledPair {
  FactorSystem first;
  FactorSystem second;
  double t = 0.0;
  double residual_t = 0.0;
  CoupledDisorder disorder;
  /// One coupled draw per Gaussian residual term, in residual order.
  std::vector<CoupledDisorder> residual_disorder;

  Realization realization_first() const;
  Realization realization_second() const;
};

/// Attaches a coupled disorder draw. Residual Gaussian terms are coupled with
/// `residual_t` (defaults to t) on their own sub-streams. Rejects systems that
/// do not share factors, site count, state space or residual structure.
CoupledPair couple(const FactorSystem& a, const FactorSystem& b, double t, const SeedSpec& seed,
                   std::optional<double> residual_t = std::nullopt);

/// Same systems, fresh Gaussians.
CoupledPair redraw(const CoupledPair& pair, const SeedSpec& seed);

}  // namespace chaoslab
