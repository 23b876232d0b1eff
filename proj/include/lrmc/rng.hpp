#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lrmc {

/// Deterministic, splittable random generator used everywhere randomness is
/// needed, so that runs are bit-reproducible for a fixed seed.
///
/// Core generator: xoshiro256++ (Blackman & Vigna), state seeded through
/// SplitMix64. Streams are derived by hashing (seed, stream_id) with
/// SplitMix64 before seeding, which keeps independent work units (benchmark
/// rolls, k-means restarts) decorrelated without sharing state.
///
/// All variates are produced by fixed, documented algorithms rather than
/// std:: distributions (whose outputs are implementation-defined):
///   uniform double:  53-bit mantissa from the top bits, in [0, 1)
///   normal:          Box-Muller on two uniforms, pair cached
///   gamma(a), a>=1:  Marsaglia-Tsang squeeze
///   gamma(a), a<1:   boost via gamma(a+1) * u^(1/a)
///   beta(a, b):      gamma ratio g1 / (g1 + g2)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream_id);

  /// Derives the seed for a named sub-stream; deterministic in (seed, ids).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t id_a, std::uint64_t id_b = 0);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform_positive();              // (0, 1]
  double normal();                        // standard normal
  double gamma(double shape);             // shape > 0, unit scale
  double beta(double a, double b);        // a, b > 0
  int uniform_int(int n);                 // {0, ..., n-1}

  /// Inverse-CDF draw from an unnormalized nonnegative weight vector.
  int categorical(std::span<const double> weights);

 private:
  std::uint64_t state_[4];
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace lrmc
