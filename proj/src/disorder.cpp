#include "chaoslab/disorder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chaoslab {

std::vector<double> sample_gaussians(std::size_t count, const SeedSpec& seed,
                                     std::uint64_t domain_tag) {
  Engine engine = make_engine(seed, domain_tag);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(count);
  for (double& x : out) x = normal(engine);
  return out;
}

CoupledDisorder sample_coupled(std::size_t index_count, double t, const SeedSpec& seed) {
  if (index_count == 0) throw std::invalid_argument("sample_coupled: index_count must be positive");
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("sample_coupled: t must lie in [0, 1], got " + std::to_string(t));

  CoupledDisorder d;
  d.t = t;
  d.z = sample_gaussians(index_count, seed, domain::latent_shared);
  d.z1 = sample_gaussians(index_count, seed, domain::latent_first);
  d.z2 = sample_gaussians(index_count, seed, domain::latent_second);

  const double a = std::sqrt(t);
  const double b = std::sqrt(1.0 - t);
  d.g1.resize(index_count);
  d.g2.resize(index_count);
  for (std::size_t e = 0; e < index_count; ++e) {
    d.g1[e] = a * d.z[e] + b * d.z1[e];
    d.g2[e] = a * d.z[e] + b * d.z2[e];
  }
  return d;
}

}  // namespace chaoslab
