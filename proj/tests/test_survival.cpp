#include <doctest.h>

#include <cmath>

#include "jhgp/data_model.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/rng.hpp"
#include "jhgp/survival.hpp"

using namespace jhgp;
using doctest::Approx;

namespace {

EventGrid single_episode(const std::vector<int>& r) {
  EventGrid g;
  g.r = r;
  g.episode_starts.push_back(0);
  for (std::size_t k = 0; k + 1 < r.size(); ++k) {
    if (r[k] == 1) g.episode_starts.push_back(k + 1);
  }
  return g;
}

// Product form: each episode contributes lambda(k) prod (1 - lambda(j)) or the
// all-survive product when it ends censored.
double product_form(const EventGrid& g, const std::vector<double>& lambda) {
  double p = 1.0;
  for (std::size_t e = 0; e < g.episode_count(); ++e) {
    const auto [b, end] = g.episode(e);
    for (std::size_t k = b; k < end; ++k) p *= g.r[k] == 1 ? lambda[k] : 1 - lambda[k];
  }
  return p;
}

}  // namespace

TEST_CASE("logit_inv") {
  CHECK(logit_inv(0.0) == 0.5);
  CHECK(1.0 - logit_inv(50.0) < 1e-20);
  CHECK(logit_inv(logit(0.25)) == Approx(0.25).epsilon(1e-12));
  CHECK(std::isfinite(logit_inv(700.0)));
  CHECK(logit_inv(-700.0) > 0.0);
  CHECK(logit_inv(-700.0) < 1e-300);
  for (double h = -30; h < 30; h += 0.5) CHECK(logit_inv(h) < logit_inv(h + 0.5));
}

TEST_CASE("episode_loglik: documented values") {
  CHECK(episode_loglik(single_episode({0, 0, 1}), {0.5, 0.5, 0.5}) == Approx(3 * std::log(0.5)).epsilon(1e-14));
  CHECK(episode_loglik(single_episode({0, 0}), {0.5, 0.5}) == Approx(std::log(0.25)).epsilon(1e-14));
  CHECK_THROWS_AS(episode_loglik(single_episode({0, 1}), {0.0, 0.5}), DomainError);
  CHECK_THROWS_AS(episode_loglik(single_episode({0, 1}), {0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(episode_loglik(single_episode({0, 1}), {0.5}), DomainError);
}

TEST_CASE("recurrent events at slots 2 and 4 match enumeration") {
  SubjectSeries s{"A", {0}, {0.0}, {2, 4}, {1, 1}};
  const EventGrid g = build_event_grid(s);
  const std::vector<double> lambda{0.1, 0.3, 0.6, 0.2, 0.45};
  const double direct = (1 - 0.1) * (1 - 0.3) * 0.6 * (1 - 0.2) * 0.45;
  CHECK(std::exp(episode_loglik(g, lambda)) == Approx(direct).epsilon(1e-12));
  CHECK(std::exp(episode_loglik(g, lambda)) == Approx(product_form(g, lambda)).epsilon(1e-12));
}

TEST_CASE("property: product form equals Bernoulli form on random grids") {
  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 1 + rng.below(15);
    std::vector<int> r(n);
    std::vector<double> lambda(n), h(n);
    for (std::size_t k = 0; k < n; ++k) {
      r[k] = rng.bernoulli(0.3) ? 1 : 0;
      lambda[k] = rng.uniform(0.01, 0.99);
      h[k] = std::log(lambda[k]) - std::log1p(-lambda[k]);
    }
    const auto g = single_episode(r);
    CHECK(episode_loglik(g, lambda) == Approx(std::log(product_form(g, lambda))).epsilon(1e-10));
    CHECK(episode_loglik(g, lambda) == Approx(bernoulli_loglik_logit(r, h)).epsilon(1e-10));
  }
}

TEST_CASE("likelihood sums to one over every sequence of a single episode") {
  Rng rng(22);
  for (std::size_t n = 1; n <= 10; ++n) {
    std::vector<double> lambda(n);
    for (auto& l : lambda) l = rng.uniform(0.05, 0.95);
    double total = 0.0;
    // a single episode is either k zeros then an event, or all zeros (censored)
    for (std::size_t k = 0; k <= n; ++k) {
      std::vector<int> r(k < n ? k + 1 : n, 0);
      if (k < n) r[k] = 1;
      std::vector<double> l(lambda.begin(), lambda.begin() + static_cast<long>(r.size()));
      total += std::exp(episode_loglik(single_episode(r), l));
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("Bernoulli form sums to one over all 2^n binary sequences") {
  Rng rng(23);
  for (std::size_t n = 1; n <= 10; ++n) {
    std::vector<double> lambda(n);
    for (auto& l : lambda) l = rng.uniform(0.05, 0.95);
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<int> r(n);
      for (std::size_t k = 0; k < n; ++k) r[k] = (mask >> k) & 1u;
      total += std::exp(episode_loglik(single_episode(r), lambda));
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("survival_curve") {
  const auto s = survival_curve({0.5, 0.5});
  CHECK(s[0] == 0.5);
  CHECK(s[1] == 0.25);
  for (double v : survival_curve(std::vector<double>(8, 1e-12))) CHECK(v == Approx(1.0));

  Rng rng(24);
  std::vector<double> lambda(6);
  for (auto& l : lambda) l = rng.uniform(0.05, 0.6);
  double none = 0.0;
  for (unsigned mask = 0; mask < 64; ++mask) {
    if (mask != 0) continue;
    double p = 1;
    for (double l : lambda) p *= 1 - l;
    none += p;
  }
  double any = 0.0;
  for (unsigned mask = 1; mask < 64; ++mask) {
    double p = 1;
    for (int k = 0; k < 6; ++k) p *= (mask >> k) & 1u ? lambda[k] : 1 - lambda[k];
    any += p;
  }
  const auto curve = survival_curve(lambda);
  CHECK(curve.back() == Approx(1 - any).epsilon(1e-12));
  CHECK(curve.back() == Approx(none).epsilon(1e-12));
  for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] <= curve[k - 1]);
}
