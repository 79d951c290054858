#include "chaoslab/seed.hpp"

#include <array>

namespace chaoslab {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine make_engine(const SeedSpec& seed, std::uint64_t domain_tag) {
  const std::uint64_t a = splitmix64(seed.master_seed ^ splitmix64(domain_tag));
  const std::uint64_t b = splitmix64(a ^ splitmix64(seed.stream_id + 0x632be59bd9b4e019ULL));
  std::array<std::uint32_t, 6> words{
      static_cast<std::uint32_t>(a),           static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b),           static_cast<std::uint32_t>(b >> 32),
      static_cast<std::uint32_t>(domain_tag),  static_cast<std::uint32_t>(seed.stream_id)};
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

SeedSpec derive(const SeedSpec& parent, std::uint64_t child) noexcept {
  return {splitmix64(parent.master_seed ^ splitmix64(parent.stream_id)), child};
}

}  // namespace chaoslab
