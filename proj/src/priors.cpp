#include "jhgp/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "jhgp/errors.hpp"

namespace jhgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

}  // namespace

double jeffreys_gp_logprior(const KernelSpec& spec, const std::vector<Tick>& grid, double sigma2,
                            std::size_t index) {
  if (!(sigma2 > 0.0)) return kNegInf;
  const auto tt = whitening_trace_terms(spec, grid, index);
  const double arg = tt.tr_u2 - tt.tr_u * tt.tr_u / static_cast<double>(tt.n);
  // relative tolerance: a 1x1 grid gives exactly 0, rounding can leave ~1e-16
  if (!(arg > 1e-12 * std::max(1.0, tt.tr_u2))) return kNegInf;
  return 0.5 * std::log(arg) - std::log(sigma2);
}

double jeffreys_shared_theta_logprior(const KernelSpec& spec, const std::vector<std::vector<Tick>>& grids,
                                      std::size_t index) {
  double total = 0.0;
  for (const auto& g : grids) {
    if (g.empty()) throw DomainError("jeffreys_shared_theta_logprior: empty subject grid");
    total += whitening_trace_terms(spec, g, index).tr_u2;
  }
  if (!(total > 0.0)) return kNegInf;
  return 0.5 * std::log(total);
}

double half_cauchy_logpdf(double x, double scale) {
  if (!(x > 0.0) || !(scale > 0.0)) return kNegInf;
  const double z = x / scale;
  return std::log(2.0 / (kPi * scale)) - std::log1p(z * z);
}

double gprior_logpdf(double value, double center, double g, double precision_scale, double sigma2) {
  if (!(g > 0.0) || !(precision_scale > 0.0) || !(sigma2 > 0.0)) return kNegInf;
  const double var = g * sigma2 / precision_scale;
  const double d = value - center;
  return -0.5 * std::log(2.0 * kPi * var) - 0.5 * d * d / var;
}

// ---------------------------------------------------------------------------
// Polya-Gamma PG(1, c)
//
// Alternating-series rejection sampler for J*(1, z) with z = |c| / 2; the PG
// draw is J* / 4. The proposal mixes a truncated exponential (right of t) and a
// truncated inverse Gaussian (left of t), t = 0.64.
// ---------------------------------------------------------------------------

namespace {

constexpr double kTrunc = 0.64;

double log_norm_cdf(double x) { return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2)); }

// n-th coefficient of the alternating series for the J*(1, 0) density.
double series_coef(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x > 0.0) {
    const double e = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x;
    return std::exp(e);
  }
  return 0.0;
}

// Probability that the proposal uses the exponential piece.
double exponential_mass(double z) {
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / kTrunc) * (kTrunc * z - 1.0);
  const double a = -std::sqrt(1.0 / kTrunc) * (kTrunc * z + 1.0);
  const double x0 = std::log(fz) + fz * kTrunc;
  const double xb = x0 - z + log_norm_cdf(b);
  const double xa = x0 + z + log_norm_cdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian IG(1/z, 1) truncated to (0, t).
double truncated_inverse_gaussian(double z, Rng& rng) {
  double x = kTrunc + 1.0;
  if (1.0 / kTrunc > z) {
    // mean above t: draw from the z = 0 (Levy) proposal and thin
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / kTrunc) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * kTrunc;
      x = kTrunc / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > kTrunc) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace

double pg_sample(double c, Rng& rng) {
  const double z = 0.5 * std::abs(c);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_exp = exponential_mass(z);
  for (;;) {
    double x = rng.uniform() < p_exp ? kTrunc + rng.exponential() / fz : truncated_inverse_gaussian(z, rng);
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double pg_mean(double c) {
  if (std::abs(c) < 1e-8) return 0.25;
  return std::tanh(0.5 * c) / (2.0 * c);
}

double pg_variance(double c) {
  const double a = std::abs(c);
  if (a < 1e-3) return 1.0 / 24.0 - a * a / 120.0;
  const double ch = std::cosh(0.5 * a);
  return (std::sinh(a) - a) / (4.0 * a * a * a * ch * ch);
}

IdentityCheck pg_augmented_identity_check(double h, int r, Rng& rng, int draws) {
  IdentityCheck out;
  out.lhs = std::exp(h * r) / (1.0 + std::exp(h));
  const double kappa = r - 0.5;
  double acc = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double w = pg_sample(0.0, rng);
    acc += std::exp(-0.5 * w * h * h + kappa * h);
  }
  out.rhs = 0.5 * acc / draws;
  return out;
}

}  // namespace jhgp
