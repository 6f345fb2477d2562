#pragma once

#include <vector>

#include "jhgp/data_model.hpp"

namespace jhgp {

/// exp(h) / (1 + exp(h)), evaluated through the sign-split form.
double logit_inv(double h);
double logit(double p);

/// log(1 + exp(h)) without overflow.
double log1p_exp(double h);

/// Bernoulli log-likelihood on the logit scale: sum_k r_k h_k - log(1 + exp(h_k)).
double bernoulli_loglik_logit(const std::vector<int>& r, const std::vector<double>& h);

/// Discrete-hazard log-likelihood of a gap-filled event grid.
/// `lambda` holds the hazard of every slot; values must lie strictly in (0, 1).
double episode_loglik(const EventGrid& grid, const std::vector<double>& lambda);

/// S(k) = prod_{j <= k} (1 - lambda_j).
std::vector<double> survival_curve(const std::vector<double>& lambda);

}  // namespace jhgp
