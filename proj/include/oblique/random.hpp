#pragma once

#include <cstdint>

namespace oblique {

/// Counter-based random numbers: every draw is a pure function of
/// (key, counter), so results never depend on scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform in (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal (Box-Muller over counters 2c, 2c+1).
  double normal(std::uint64_t counter) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t z);

/// Sequential convenience wrapper for samplers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
  double uniform() { return rng_.uniform(counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return rng_.normal(counter_++); }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

}  // namespace oblique
