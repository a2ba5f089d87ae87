// Deterministic random number generation for Monte Carlo harnesses.
//
// Every trial draws from its own engine seeded by mix_seed(master, ...), so
// results are independent of thread scheduling and identical across runs with
// the same (config, seed). Gaussian variates use an explicit Box-Muller
// transform instead of std::normal_distribution, whose output sequence is
// implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gkpsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of a master seed with stream indices.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (a + 0x632be59bd9b4e019ULL));
  s = splitmix64(s ^ (b + 0x9e6c63d0876a9a47ULL));
  s = splitmix64(s ^ (c + 0xd1b54a32d192ed03ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gkpsim
