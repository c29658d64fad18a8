#pragma once

#include <cmath>
#include <cstdint>

namespace gainlab {

// Counter-based deterministic RNG. Streams are keyed by
// (master seed, trial index, episode index, purpose), so trials and
// episodes draw from independent sequences regardless of scheduling
// order or thread count. Normal draws use Box-Muller on top of the
// 53-bit uniforms, keeping the byte stream identical across
// toolchains (std::normal_distribution is implementation-defined).
class SeedStream {
 public:
  SeedStream() : state_(mix(0x9e3779b97f4a7c15ull)) {}
  explicit SeedStream(std::uint64_t key) : state_(mix(key)) {}

  static SeedStream keyed(std::uint64_t seed, std::uint64_t trial,
                          std::uint64_t episode, std::uint64_t purpose = 0) {
    std::uint64_t k = mix(seed + 0x9e3779b97f4a7c15ull);
    k = mix(k ^ (trial + 0xbf58476d1ce4e5b9ull));
    k = mix(k ^ (episode + 0x94d049bb133111ebull));
    k = mix(k ^ (purpose + 0xd6e8feb86659fd93ull));
    return SeedStream(k);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // uniform in [0, 1)
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean, double std) {
    // u1 in (0, 1] so log() is finite
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + std * r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace gainlab
