#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace jhgp {

/// Seeded random stream used by every stochastic routine.
///
/// Only the raw 64-bit engine comes from the standard library; the variate
/// transforms are written out here so that a seed yields the same stream on
/// every standard library implementation (std:: distributions are
/// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x5eedULL) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                      static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
    has_spare_ = false;
  }

  /// Derive an independent stream, e.g. one per chain.
  Rng split(std::uint64_t stream) {
    return Rng(engine_() ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    // 53 random bits, shifted by half an ulp so 0 is never returned
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Marsaglia polar method.
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

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential() { return -std::log(uniform()); }

  /// Gamma(shape, rate = 1), Marsaglia and Tsang.
  double gamma(double shape) {
    if (shape < 1.0) {
      // boost: Gamma(a) = Gamma(a + 1) * U^(1/a)
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Inverse-gamma with density proportional to x^(-shape-1) exp(-rate/x).
  double inv_gamma(double shape, double rate) { return rate / gamma(shape); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace jhgp
