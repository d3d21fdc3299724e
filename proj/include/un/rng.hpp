#pragma once

// Seeded random number generation with deterministic stream derivation.
//
// The engine is std::mt19937_64 (fully specified by the standard), and all
// variate transforms are implemented here rather than via std::*_distribution,
// whose algorithms are implementation-defined. This keeps every random output
// reproducible for a given seed across compilers and standard libraries.
//
// Independent work items (simulation replications, bootstrap replicates,
// per-draw matchings) must not share one generator: derive a child stream
// from (seed, purpose, index) instead. Derivation uses splitmix64 mixing, so
// streams are decorrelated and the assignment of work to threads cannot
// change any result.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace un {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_str(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) h = hash_combine(h, c);
  return h;
}

}  // namespace detail

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer on [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via the Marsaglia polar method; caches the spare draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Child-stream seed keyed by a purpose tag plus indices. Deterministic and
  // independent of any generator state, so parallel work items can derive
  // their own streams without coordination.
  static std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                                   std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::hash_str(h, purpose);
    h = detail::hash_combine(h, a);
    h = detail::hash_combine(h, b);
    return h;
  }

  static Rng derive(std::uint64_t seed, std::string_view purpose,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(seed, purpose, a, b));
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace un
