#pragma once

#include <cmath>
#include <cstdint>

namespace sfh {

// Stateless counter-based random stream. Every variate is a pure function of
// (key, counter), so replica k is reproducible in isolation and draws can be
// generated in any order (or in parallel) with identical results.
//
// Derivation: key = mix(mix(mix(master) ^ stream_a * C1) ^ stream_b * C2),
// variate i of the stream = splitmix64 finalizer of key + i * GOLDEN.
struct CounterRng {
  std::uint64_t key = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static CounterRng derive(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t k = mix(master);
    k = mix(k ^ (a * 0xD6E8FEB86659FD93ULL));
    k = mix(k ^ (b * 0xC2B2AE3D27D4EB4FULL));
    return CounterRng{k};
  }

  std::uint64_t bits(std::uint64_t counter) const {
    return mix(key + counter * 0x9E3779B97F4A7C15ULL);
  }

  // uniform in (0, 1)
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // one standard normal per counter (Box-Muller, cosine branch)
  double normal(std::uint64_t counter) const {
    double u1 = uniform(2 * counter);
    double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // independent pair from one counter (both Box-Muller branches)
  void normal_pair(std::uint64_t counter, double& z1, double& z2) const {
    double u1 = uniform(2 * counter);
    double u2 = uniform(2 * counter + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    z1 = r * std::cos(6.283185307179586477 * u2);
    z2 = r * std::sin(6.283185307179586477 * u2);
  }

  // map a signed physical cell index to a counter (zig-zag), so that grids of
  // different extent but equal spacing agree on shared cells
  static std::uint64_t zigzag(std::int64_t i) {
    return static_cast<std::uint64_t>((i << 1) ^ (i >> 63));
  }
};

}  // namespace sfh
