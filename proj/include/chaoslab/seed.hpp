#pragma once

#include <cstdint>
#include <random>

namespace chaoslab {

/// Identifies one reproducible random stream: a run-wide master seed and a
/// replica index. Identical specs give bit-identical draws.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using Engine = std::mt19937_64;

/// Sub-stream tags. Each consumer of randomness owns a domain so that adding
/// draws in one place never shifts another consumer's stream.
namespace domain {
inline constexpr std::uint64_t latent_shared = 1;
inline constexpr std::uint64_t latent_first = 2;
inline constexpr std::uint64_t latent_second = 3;
inline constexpr std::uint64_t clauses = 16;
inline constexpr std::uint64_t weights = 17;
inline constexpr std::uint64_t poisson = 18;
inline constexpr std::uint64_t single_disorder = 32;
inline constexpr std::uint64_t mcmc_chain = 1024;
inline constexpr std::uint64_t residual_base = 1u << 20;
}  // namespace domain

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Engine keyed on (master_seed, stream_id, domain) through a splitmix64
/// finalizer chain feeding std::seed_seq.
Engine make_engine(const SeedSpec& seed, std::uint64_t domain_tag = 0);

/// Child spec for nested replica loops (e.g. MCMC inside a disorder replica).
SeedSpec derive(const SeedSpec& parent, std::uint64_t child) noexcept;

}  // namespace chaoslab
