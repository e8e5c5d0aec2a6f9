#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dasml {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic substream derivation: the same (seed, tag, index) always
// yields the same engine state, independent of evaluation order.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  const std::uint64_t mixed = splitmix64(seed ^ (tag * 0xd6e8feb86659fd93ULL));
  return std::mt19937_64(splitmix64(mixed + 0x9e3779b97f4a7c15ULL * (index + 1)));
}

// Uniform in [0,1) from the top 53 bits of the engine output.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Box-Muller, pinned here so generated traces do not depend on
// standard-library distribution internals.
class Gaussian {
 public:
  double operator()(std::mt19937_64& g) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform01(g);
    const double u2 = uniform01(g);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dasml
