#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace ugmae {

/// Seeded random stream with platform-independent derived distributions.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The library distributions (std::normal_distribution etc.) are
/// implementation-defined, so every real-valued draw here is derived from the
/// raw 64-bit stream by the formulas below:
///   uniform()      = (next() >> 11) * 2^-53              in [0, 1)
///   uniform_open() = ((next() >> 11) + 0.5) * 2^-53      in (0, 1)
///   normal()       = Box-Muller on two uniform_open() draws, cosine branch
///   gumbel()       = -log(-log(uniform_open()))
///   index(n)       = rejection sampling on next() (unbiased)
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform_open();
  double normal();
  double gumbel();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

  /// Textual engine state; round-trips exactly through set_state().
  std::string state() const;
  void set_state(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ugmae
