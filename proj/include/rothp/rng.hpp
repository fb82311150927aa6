#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace rothp {

// splitmix64 step; also used as the finalizer for counter-based streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  return splitmix64(s);
}

inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// Small seeded stream used by the simulator and trainer shuffles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // burn-in so nearby seeds decorrelate
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }
  double next_unit() { return unit_from_bits(next_u64()); }

  double next_exponential(double rate) {
    return -std::log1p(-next_unit()) / rate;
  }

  // standard normal via Box-Muller (both draws consumed, one returned)
  double next_normal() {
    double u1 = next_unit();
    while (u1 == 0.0) u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Fisher-Yates; stdlib shuffle is implementation-defined, this is not.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stateless uniform in [0,1) keyed by (seed, stream, interval, sample):
// the per-interval substream for the Monte Carlo integrator. The draw
// depends only on the keys, never on timestamp values.
inline double counter_unit(std::uint64_t seed, std::uint64_t stream, std::uint64_t interval, std::uint64_t sample) {
  return unit_from_bits(mix64(mix64(mix64(seed, stream), interval), sample));
}

}  // namespace rothp
