#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>

namespace regrasp {

/// Counter-based pseudo-random generator built on the splitmix64 finalizer.
/// Every draw is a pure function of (key, counter), so independent streams can
/// be derived per trial, per move, or per camera without sharing state, and a
/// given stream replays identically on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return mix(a ^ (mix(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  }

  CounterRng derive(std::uint64_t stream) const { return CounterRng(combine(key_, stream)); }

  std::uint64_t next_u64() { return mix(key_ ^ mix(counter_++)); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  /// Standard normal via Box-Muller; two uniform draws per sample.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double sigma) { return sigma == 0.0 ? 0.0 : sigma * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace regrasp
