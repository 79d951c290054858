#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "chaoslab/models.hpp"
#include "chaoslab/seed.hpp"

namespace chaoslab {

enum class EngineKind { exact, mcmc };
std::string_view to_string(EngineKind kind);

/// Which second moments <f_e f_e'> to compute. `all` materializes the full
/// table and is limited to |E| <= kMaxDensePairs.
class MomentRequest {
 public:
  static MomentRequest first_only() { return MomentRequest(Mode::none, {}); }
  static MomentRequest all() { return MomentRequest(Mode::all, {}); }
  static MomentRequest pairs(std::vector<std::pair<std::size_t, std::size_t>> wanted);

  bool wants_all() const noexcept { return mode_ == Mode::all; }
  bool wants_none() const noexcept { return mode_ == Mode::none; }
  const std::vector<std::pair<std::size_t, std::size_t>>& listed() const noexcept {
    return pairs_;
  }

 private:
  enum class Mode { none, all, listed };
  MomentRequest(Mode mode, std::vector<std::pair<std::size_t, std::size_t>> pairs)
      : mode_(mode), pairs_(std::move(pairs)) {}
  Mode mode_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

inline constexpr std::size_t kMaxDensePairs = 512;
inline constexpr std::size_t kMaxExactConfigurations = std::size_t{1} << 24;

/// Single-system Gibbs moments <f_e> and <f_e f_e'> for one realization.
/// Second moments are stored once per unordered pair, so the table is
/// symmetric by construction.
class MomentTable {
 public:
  MomentTable() = default;
  MomentTable(std::size_t index_count, const MomentRequest& request, EngineKind method);

  EngineKind method() const noexcept { return method_; }
  std::size_t index_count() const noexcept { return first_.size(); }
  /// log Z (exact engine only; NaN for MCMC).
  double log_partition() const noexcept { return log_partition_; }
  bool has_stderr() const noexcept { return !first_stderr_.empty(); }
  bool is_dense() const noexcept { return dense_; }

  double first(std::size_t e) const { return first_.at(e); }
  double first_stderr(std::size_t e) const;
  const std::vector<double>& first_moments() const noexcept { return first_; }

  bool has_second(std::size_t e, std::size_t f) const;
  double second(std::size_t e, std::size_t f) const;
  double second_stderr(std::size_t e, std::size_t f) const;
  /// Stored unordered pairs (e <= f), in storage order.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& stored_pairs() const noexcept {
    return pairs_;
  }

  // Filled by the engines.
  std::vector<double>& mutable_first() noexcept { return first_; }
  std::vector<double>& mutable_second() noexcept { return second_; }
  std::vector<double>& mutable_first_stderr() noexcept { return first_stderr_; }
  std::vector<double>& mutable_second_stderr() noexcept { return second_stderr_; }
  void set_log_partition(double v) noexcept { log_partition_ = v; }

 private:
  std::size_t slot(std::size_t e, std::size_t f) const;

  EngineKind method_ = EngineKind::exact;
  bool dense_ = false;
  double log_partition_ = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> first_, first_stderr_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
  std::vector<double> second_, second_stderr_;
};

/// Exact Gibbs averages by enumeration of all |S|^N configurations. Factor
/// values are tabulated once per system so that repeated disorder draws only
/// redo the weighted sums. Sums run in log space with a max shift.
class ExactEnumerator {
 public:
  explicit ExactEnumerator(const FactorSystem& system);

  std::size_t configuration_count() const noexcept { return configs_; }
  void decode(std::size_t c, std::span<std::uint32_t> states) const;

  MomentTable moments(const Realization& r, const MomentRequest& request) const;
  /// Normalized Gibbs probabilities indexed by configuration code.
  std::vector<double> distribution(const Realization& r) const;

  const FactorSystem& system() const noexcept { return system_; }

 private:
  std::vector<double> log_weights(const Realization& r) const;
  void chaos_values(std::size_t c, std::span<double> out) const;

  FactorSystem system_;
  std::size_t configs_ = 0;
  std::size_t states_per_site_ = 0;
  bool tabulated_ = false;
  std::vector<double> chaos_table_;                  // configs x |E|
  std::vector<std::vector<double>> residual_tables_; // per residual term
  std::vector<double> base_log_weight_;              // sum_i log nu(s_i)
};

/// Throws CapacityError when |S|^N exceeds kMaxExactConfigurations.
MomentTable exact_moments(const FactorSystem& system, const Realization& r,
                          const MomentRequest& request);

struct McmcConfig {
  std::size_t sweeps = 20000;  // total, including burn-in
  std::size_t burn_in = 2000;
  std::size_t thin = 1;
  std::size_t chains = 1;
  /// Non-convergence threshold on every reported standard error.
  double stderr_cap = std::numeric_limits<double>::infinity();

  void validate() const;
};

inline constexpr std::size_t kBatchCount = 32;

/// Single-site Metropolis chain. One sweep proposes a move at every site in
/// order 0..N-1; Ising proposals flip, vector proposals are uniform over
/// S minus the current state.
class MetropolisChain {
 public:
  MetropolisChain(const FactorSystem& system, const Realization& r, Engine engine);

  void sweep();
  Spins state() const noexcept { return state_; }
  /// Current chaos-factor values f_e(sigma), kept in sync with the state.
  const std::vector<double>& factor_values() const noexcept { return values_; }
  double acceptance_rate() const noexcept;

 private:
  void propose(std::uint32_t site);

  const FactorSystem* system_;
  const Realization* realization_;
  Engine engine_;
  SpinConfiguration state_;
  std::vector<double> values_;
  std::vector<std::vector<std::uint32_t>> chaos_at_site_;
  std::vector<std::vector<std::vector<std::uint32_t>>> residual_at_site_;
  std::vector<double> scratch_;
  std::size_t proposed_ = 0;
  std::size_t accepted_ = 0;
};

/// Moment estimates with batch-means standard errors (kBatchCount batches per
/// chain, pooled across chains). Throws NonConvergenceError when some stderr
/// exceeds config.stderr_cap.
MomentTable mcmc_moments(const FactorSystem& system, const Realization& r,
                         const MomentRequest& request, const McmcConfig& config,
                         const SeedSpec& seed);

struct EngineChoice {
  EngineKind kind = EngineKind::exact;
  McmcConfig mcmc;

  static EngineChoice exact() { return {}; }
  static EngineChoice metropolis(const McmcConfig& config) {
    return {EngineKind::mcmc, config};
  }
};

/// Dispatch helper: exact via an enumerator, or MCMC seeded by `seed`.
MomentTable compute_moments(const FactorSystem& system, const Realization& r,
                            const MomentRequest& request, const EngineChoice& engine,
                            const SeedSpec& seed, const ExactEnumerator* enumerator = nullptr);

struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

/// Two-system replica moments for bond overlaps Q_{l,l'} between sigma ~ G1
/// and rho ~ G2, by product factorization:
///   q      = <Q11>
///   q2     = <Q11^2>
///   q11q21 = <Q11 Q21> = |E|^-2 sum_{e,e'} <f_e>_1 <f_e'>_1 <f_e f_e'>_2
struct OverlapMoments {
  double q = 1.0;
  double q2 = 1.0;
  double q11q21 = 1.0;
};
OverlapMoments overlap_moments(const MomentTable& first, const MomentTable& second);

/// Inner variance <Q^2> - <Q>^2 of the bond overlap between the two systems
/// of `pair` for its attached disorder, assembled from single-system moments:
///   <Q>   = |E|^-1 sum_e <f_e>_1 <f_e>_2
///   <Q^2> = |E|^-2 sum_{e,e'} <f_e f_e'>_1 <f_e f_e'>_2.
/// With no factors (empty diluted draw) Q is the constant 1 and the result 0.
Estimate replica_variance(const CoupledPair& pair, const EngineChoice& engine,
                          const SeedSpec& mcmc_seed = {});

}  // namespace chaoslab
