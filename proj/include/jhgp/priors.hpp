#pragma once

#include <vector>

#include "jhgp/kernels.hpp"
#include "jhgp/rng.hpp"

namespace jhgp {

/// Scale hyperparameters of the prior hierarchy.
struct PriorState {
  double sigma2_y = 1.0;                 // observation noise variance
  std::vector<double> sigma2_psi;        // per-subject individual-process variance
  std::vector<double> nu;                // half-Cauchy mixing variables for sigma_psi
  double tau2 = 1.0;                     // global scale (squared)
  double xi = 1.0;                       // half-Cauchy mixing variable for tau
  double g_gamma = 1.0;
  double g_eta = 1.0;
  double g_phi = 1.0;
  double mu_phi = 0.0;

  bool operator==(const PriorState&) const = default;
};

/// 0.5 log(tr(U^2) - tr(U)^2 / n) - log(sigma2), up to a constant.
/// Returns -infinity when the trace argument is not positive.
double jeffreys_gp_logprior(const KernelSpec& spec, const std::vector<Tick>& grid, double sigma2,
                            std::size_t index = 0);

/// 0.5 log(sum_i tr(U_i^2)) for a hyperparameter shared across subject grids.
double jeffreys_shared_theta_logprior(const KernelSpec& spec, const std::vector<std::vector<Tick>>& grids,
                                      std::size_t index = 0);

/// Density of the half-Cauchy C+(0, scale) on x > 0. -infinity outside.
double half_cauchy_logpdf(double x, double scale);

/// Normal log density with variance g * sigma2 / precision_scale.
double gprior_logpdf(double value, double center, double g, double precision_scale, double sigma2 = 1.0);

/// Exact draw from the Polya-Gamma PG(1, c) distribution (Devroye-type
/// alternating-series rejection sampler).
double pg_sample(double c, Rng& rng);

/// E[PG(1, c)] = tanh(c / 2) / (2 c), with the c -> 0 limit 1/4.
double pg_mean(double c);
/// Var[PG(1, c)]; 1/24 at c = 0.
double pg_variance(double c);

struct IdentityCheck {
  double lhs = 0.0;  // exp(h r) / (1 + exp(h))
  double rhs = 0.0;  // (1/2) E_omega[exp(-omega h^2 / 2 + (r - 1/2) h)], omega ~ PG(1, 0)
};

/// Monte Carlo check of the Polya-Gamma augmentation identity.
IdentityCheck pg_augmented_identity_check(double h, int r, Rng& rng, int draws = 100000);

}  // namespace jhgp
