#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace eb {

/// Deterministic 64-bit PRNG (xoshiro256++) with explicit seeding.
///
/// All samplers in this library draw from this generator through the
/// distribution helpers below, so a (seed, call sequence) pair produces
/// bitwise-identical streams on every build. Standard-library
/// distributions are avoided on purpose: their output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state
    std::uint64_t z = seed;
    for (auto& s : state_) {
      z += 0x9e3779b97f4a7c15ULL;
      std::uint64_t w = z;
      w = (w ^ (w >> 30)) * 0xbf58476d1ce4e5b9ULL;
      w = (w ^ (w >> 27)) * 0x94d049bb133111ebULL;
      s = w ^ (w >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit-rate exponential.
  double exponential() { return -std::log1p(-uniform()); }

  /// Standard normal via Box-Muller; the spare draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Poisson draw by CDF inversion. Exact for lambda = 0; adequate for
  /// the bounded rates used here (lambda <= a few hundred).
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u > cdf) {
      ++k;
      p *= lambda / k;
      cdf += p;
      if (p < 1e-320 && k > lambda) break;  // tail exhausted
    }
    return k;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection-free enough for our n << 2^64
    return next_u64() % n;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stable 64-bit mix of a root seed, a stream tag, and an index.
///
/// Used everywhere a derived stream is needed (per-rep seeds, per-batch
/// seeds, worker seeds), so adding a new experiment never perturbs the
/// streams of existing ones.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag bytes
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  auto mix = [](std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(root + 0x9e3779b97f4a7c15ULL * h) + index);
}

}  // namespace eb
