#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace bvn {

// splitmix64 finalizer, used to derive engine seeds and child-stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded pseudo-random stream providing the variates the samplers need.
// Deterministic given its seed. child(i) derives a stream that is
// independent of the parent's sequence and of every other child, so
// replications can be farmed out to workers without sharing state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(seed), engine_(mix64(seed)) {}

  RngStream child(std::uint64_t index) const {
    return RngStream(mix64(key_ ^ mix64(index + 0x9e3779b97f4a7c15ULL)));
  }

  double uniform01() { return unif_(engine_); }          // [0, 1)
  double uniform_pos() { return 1.0 - unif_(engine_); }  // (0, 1]

  double normal() { return norm_(engine_); }

  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::invalid_argument("gamma: shape and scale must be positive");
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }

  // chi^2_nu == gamma(nu/2, 2). Small integer d.f. dominate the n = 3
  // simulations, so they get exact shortcuts.
  double chisq(double df) {
    if (!(df > 0.0)) throw std::invalid_argument("chisq: df must be positive");
    if (df == 1.0) {
      const double z = normal();
      return z * z;
    }
    if (df == 2.0) return -2.0 * std::log(uniform_pos());
    if (df == 3.0) {
      const double z = normal();
      return z * z - 2.0 * std::log(uniform_pos());
    }
    if (df == 4.0) {
      const double u = uniform_pos(), v = uniform_pos();
      return -2.0 * std::log(u * v);
    }
    return gamma(0.5 * df, 2.0);
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> norm_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace bvn
