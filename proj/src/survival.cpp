#include "jhgp/survival.hpp"

#include <cmath>

#include "jhgp/errors.hpp"

namespace jhgp {

double logit_inv(double h) {
  if (h >= 0.0) return 1.0 / (1.0 + std::exp(-h));
  const double e = std::exp(h);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logit needs p in (0, 1)");
  return std::log(p) - std::log1p(-p);
}

double log1p_exp(double h) {
  if (h > 0.0) return h + std::log1p(std::exp(-h));
  return std::log1p(std::exp(h));
}

double bernoulli_loglik_logit(const std::vector<int>& r, const std::vector<double>& h) {
  if (r.size() != h.size()) throw DomainError("bernoulli_loglik_logit: length mismatch");
  double ll = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) ll += r[k] * h[k] - log1p_exp(h[k]);
  return ll;
}

double episode_loglik(const EventGrid& grid, const std::vector<double>& lambda) {
  if (lambda.size() != grid.size()) throw DomainError("episode_loglik: lambda not aligned with grid");
  std::vector<double> h(lambda.size());
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    const double l = lambda[k];
    if (!(l > 0.0 && l < 1.0)) throw DomainError("episode_loglik: hazard must lie strictly in (0, 1)");
    h[k] = std::log(l) - std::log1p(-l);
  }
  return bernoulli_loglik_logit(grid.r, h);
}

std::vector<double> survival_curve(const std::vector<double>& lambda) {
  std::vector<double> s(lambda.size());
  double acc = 1.0;
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    acc *= 1.0 - lambda[k];
    s[k] = acc;
  }
  return s;
}

}  // namespace jhgp
