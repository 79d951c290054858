#pragma once

#include <cstddef>
#include <vector>

#include "chaoslab/seed.hpp"

namespace chaoslab {

/// Gaussian pairs (g1[e], g2[e]) with unit variances and correlation t, kept
/// together with the latent triple they were built from:
///   g1 = sqrt(t) z + sqrt(1-t) z1,   g2 = sqrt(t) z + sqrt(1-t) z2.
struct CoupledDisorder {
  double t = 0.0;
  std::vector<double> z, z1, z2;
  std::vector<double> g1, g2;

  std::size_t size() const noexcept { return g1.size(); }
};

/// Draws |E| coupled pairs. z, z1 and z2 come from separate sub-streams, so
/// at t = 0 the pair is exactly (z1, z2) and at t = 1 both equal z.
CoupledDisorder sample_coupled(std::size_t index_count, double t, const SeedSpec& seed);

/// Independent standard Gaussians on the given sub-stream.
std::vector<double> sample_gaussians(std::size_t count, const SeedSpec& seed,
                                     std::uint64_t domain_tag);

}  // namespace chaoslab
