#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "jhgp/errors.hpp"
#include "jhgp/forecast.hpp"
#include "jhgp/metrics.hpp"
#include "jhgp/sampler.hpp"
#include "jhgp/simulate.hpp"

using namespace jhgp;

namespace {

std::vector<SubjectSeries> small_data() {
  std::vector<SubjectSeries> out;
  const double ys[3][6] = {{0.4, 0.9, 1.3, 0.7, 0.2, -0.1}, {-0.5, -0.2, 0.3, 0.1, -0.4, -0.8}, {1.1, 1.4, 1.0, 1.6, 1.2, 0.9}};
  const int rs[3][6] = {{0, 0, 1, 0, 0, 1}, {0, 0, 0, 0, 0, 0}, {1, 0, 0, 1, 1, 0}};
  for (int i = 0; i < 3; ++i) {
    SubjectSeries s;
    s.subject_id = "s" + std::to_string(i);
    for (int k = 0; k < 6; ++k) {
      s.obs_ticks.push_back(k + 1);
      s.y.push_back(ys[i][k]);
      s.event_ticks.push_back(k + 1);
      s.r.push_back(rs[i][k]);
    }
    out.push_back(s);
  }
  return out;
}

// Real layout from a short chain, then every state overwritten with fixed values.
PosteriorDraws fixed_draws(ModelMode mode, const KernelSpec& psi_kernel, double sigma2_psi, double sigma2_y,
                           int n_draws = 50) {
  SamplerConfig cfg;
  cfg.mode = mode;
  cfg.psi_kernel = psi_kernel;
  cfg.iterations = n_draws + 10;
  cfg.burn_in = 10;
  cfg.thin = 1;
  PosteriorDraws d = run_chain(small_data(), cfg, 1);
  for (auto& s : d.states) {
    if (s.mu_y.size() > 0) s.mu_y.setConstant(0.5);
    if (s.mu_h.size() > 0) s.mu_h.setConstant(-1.0);
    for (auto& g : s.gamma) g = 0.3;
    for (auto& e : s.eta) e = 0.2;
    for (auto& v : s.prior.sigma2_psi) v = sigma2_psi;
    s.prior.sigma2_y = sigma2_y;
    if (!s.theta_psi.empty()) s.theta_psi = {-0.5};
    if (mode == ModelMode::Joint) s.phi = 0.8;
  }
  return d;
}

std::vector<Tick> range(Tick a, Tick b) {
  std::vector<Tick> out;
  for (Tick t = a; t <= b; ++t) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("AR equivalence: documented example and empty horizon") {
  const auto p = ar_equivalence_check(-0.8, {1.0, -0.8, 0.64}, 1);
  REQUIRE(p.krige.size() == 1);
  CHECK(p.krige[0] == doctest::Approx(-0.512).epsilon(1e-12));
  CHECK(p.recursion[0] == doctest::Approx(-0.512).epsilon(1e-12));
  const auto e = ar_equivalence_check(-0.3, {1.0, 2.0}, 0);
  CHECK(e.krige.empty());
  CHECK(e.recursion.empty());
  CHECK_THROWS_AS(ar_equivalence_check(-1.0, {1.0, 2.0}, 1), DomainError);
  CHECK_THROWS_AS(ar_equivalence_check(-0.5, {1.0}, 1), DomainError);
}

TEST_CASE("AR equivalence: 1000 random instances, 5-step paths") {
  Rng rng(2718);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double rho = rng.uniform(-0.95, -0.05);
    const int n = 5 + static_cast<int>(rng.below(26));
    std::vector<double> x{rng.normal()};
    for (int k = 1; k < n; ++k) x.push_back(rho * x.back() + std::sqrt(1 - rho * rho) * rng.normal());
    const auto p = ar_equivalence_check(rho, x, 5);
    REQUIRE(p.krige.size() == 5);
    for (int k = 0; k < 5; ++k) worst = std::max(worst, std::abs(p.krige[k] - p.recursion[k]));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("forecast at an observed tick reproduces the observation when noise is tiny") {
  const auto d = fixed_draws(ModelMode::LongitudinalOnly, KernelSpec::ar1(-0.5), 1.0, 1e-8);
  const auto subj = small_data()[0];
  const auto f = forecast_subject(d, subj, {3}, 5);
  REQUIRE(f.y_mean.size() == 1);
  CHECK(std::abs(f.y_mean[0] - subj.y[2]) <= 2.0 * f.y_sd[0] + 1e-6);
  CHECK(f.y_mean[0] == doctest::Approx(1.3).epsilon(1e-3));
}

TEST_CASE("far-horizon forecast decays to the population mean and width") {
  const auto d = fixed_draws(ModelMode::LongitudinalOnly, KernelSpec::ar1(-0.5), 1.0, 0.05);
  const auto subj = small_data()[0];
  const std::vector<Tick> s{80};
  const auto p = predict_draw(d, 0, subj, s);
  const auto q = predict_draw(d, 0, subj, s, false);
  CHECK(std::abs(p.psi_mean(0)) < 1e-12);
  CHECK(p.psi_cov(0, 0) == doctest::Approx(q.psi_cov(0, 0)).epsilon(1e-12));
  CHECK(p.mu_y(0) == doctest::Approx(q.mu_y(0)));
}

TEST_CASE("predictive variance grows with distance from the last observation") {
  for (double s2y : {1e-6, 0.05, 0.5}) {
    const auto d = fixed_draws(ModelMode::LongitudinalOnly, KernelSpec::ar1(-0.7), 0.8, s2y, 5);
    const auto subj = small_data()[1];
    for (std::size_t k = 0; k < d.size(); ++k) {
      const auto p = predict_draw(d, k, subj, range(7, 20));
      for (Eigen::Index j = 1; j < p.psi_cov.rows(); ++j) CHECK(p.psi_cov(j, j) >= p.psi_cov(j - 1, j - 1) - 1e-12);
    }
  }
}

TEST_CASE("Brownian individual process keeps a constant offset beyond the data") {
  const auto d = fixed_draws(ModelMode::LongitudinalOnly, KernelSpec::brownian(), 0.7, 0.1, 5);
  const auto subj = small_data()[2];
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto p = predict_draw(d, k, subj, range(7, 15));
    const auto pop = predict_draw(d, k, subj, range(7, 15), false);
    const double first = p.psi_mean(0) + p.mu_y(0) - pop.mu_y(0);
    for (Eigen::Index j = 1; j < p.psi_mean.size(); ++j) {
      CHECK(std::abs(p.psi_mean(j) + p.mu_y(j) - pop.mu_y(j) - first) < 1e-8);
    }
    CHECK(std::abs(first) > 1e-3);
  }
}

TEST_CASE("hazard forecasts stay inside (0, 1) and bands are ordered") {
  const auto d = fixed_draws(ModelMode::Joint, KernelSpec::ar1(-0.5), 1.0, 0.1);
  const auto f = forecast_subject(d, small_data()[0], range(4, 12), 9);
  for (std::size_t j = 0; j < f.ticks.size(); ++j) {
    CHECK(f.lambda_lo[j] > 0.0);
    CHECK(f.lambda_hi[j] < 1.0);
    CHECK(f.lambda_lo[j] <= f.lambda_mean[j]);
    CHECK(f.lambda_mean[j] <= f.lambda_hi[j]);
    CHECK(f.y_lo[j] <= f.y_mean[j]);
    CHECK(f.y_mean[j] <= f.y_hi[j]);
  }
  // survival-only draws carry no Y
  const auto so = forecast_subject(fixed_draws(ModelMode::SurvivalOnly, KernelSpec::ar1(-0.5), 1.0, 1.0),
                                   small_data()[0], {7, 8}, 9);
  CHECK(!so.has_y);
  CHECK(std::isnan(so.y_mean[0]));
  CHECK(so.lambda_mean[0] > 0.0);
}

TEST_CASE("population-only forecast equals the full forecast without individual variance") {
  const auto d = fixed_draws(ModelMode::Joint, KernelSpec::ar1(-0.5), 0.0, 0.1);
  const auto s = range(2, 9);
  const auto a = forecast_subject(d, small_data()[1], s, 4);
  const auto b = population_only_forecast(d, small_data()[1], s, 4);
  CHECK(a.y_mean == b.y_mean);
  CHECK(a.y_lo == b.y_lo);
  CHECK(a.lambda_mean == b.lambda_mean);
  CHECK(a.pop_mean == b.pop_mean);
}

TEST_CASE("constant mean draw gives a flat population forecast") {
  const auto d = fixed_draws(ModelMode::LongitudinalOnly, KernelSpec::ar1(-0.5), 1.0, 0.1);
  const auto f = population_only_forecast(d, small_data()[0], range(1, 6), 3);
  for (double v : f.pop_mean) CHECK(v == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("forecast errors") {
  const auto d = fixed_draws(ModelMode::LongitudinalOnly, KernelSpec::ar1(-0.5), 1.0, 0.1, 2);
  CHECK_THROWS_AS(forecast_subject(PosteriorDraws{}, small_data()[0], {7}, 1), DomainError);
  CHECK_THROWS_AS(forecast_subject(d, small_data()[0], {}, 1), DomainError);
  SubjectSeries stranger{"zz", {1, 2}, {0.0, 0.0}, {}, {}};
  CHECK_THROWS_AS(forecast_subject(d, stranger, {3}, 1), DataError);
  CHECK_THROWS_AS(fitted_hazard(d, small_data()), DomainError);
}

TEST_CASE("forecast is deterministic and the CSV round-trips") {
  const auto d = fixed_draws(ModelMode::Joint, KernelSpec::ar1(-0.5), 1.0, 0.1, 20);
  const auto a = forecast_subject(d, small_data()[0], {7, 8, 9}, 77);
  const auto b = forecast_subject(d, small_data()[0], {7, 8, 9}, 77);
  CHECK(a.y_mean == b.y_mean);
  CHECK(a.lambda_hi == b.lambda_hi);
  std::ostringstream os;
  write_forecast_csv(os, {a});
  std::istringstream is(os.str());
  const auto back = read_forecast_csv(is);
  REQUIRE(back.size() == 1);
  CHECK(back[0].ticks == a.ticks);
  CHECK(back[0].y_mean == a.y_mean);
  CHECK(back[0].lambda_lo == a.lambda_lo);
  CHECK(back[0].pop_mean == a.pop_mean);
  std::istringstream bad("subject_id,tick\n");
  CHECK_THROWS_AS(read_forecast_csv(bad), DataError);
}

TEST_CASE("in-window forecast agrees with the fitted per-tick posterior") {
  SamplerConfig cfg;
  cfg.mode = ModelMode::LongitudinalOnly;
  cfg.iterations = 2400;
  cfg.burn_in = 400;
  cfg.thin = 5;
  const auto data = small_data();
  const auto d = run_chain(data, cfg, 17);
  const std::size_t i = 2;
  const auto f = forecast_subject(d, data[i], range(1, 6), 18);
  for (std::size_t k = 0; k < 6; ++k) {
    double acc = 0.0;
    for (const auto& st : d.states) acc += st.gamma[i] + st.mu_y(static_cast<Eigen::Index>(k)) + st.psi[i](static_cast<Eigen::Index>(k));
    const double fitted = acc / static_cast<double>(d.size());
    CHECK(std::abs(f.y_mean[k] - fitted) < 0.1);
  }
}

TEST_CASE("individual forecasts beat population-only forecasts on masked simulated data") {
  SimConfig sc = SimConfig::preset("sim1");
  Rng sim(61);
  const auto ds = simulate_dataset(sc, sim);
  Rng mask_rng(62);
  const auto split = mask_second_half(ds.data, 0.5, mask_rng);
  SamplerConfig cfg;
  cfg.iterations = 2000;
  cfg.burn_in = 1000;
  cfg.thin = 5;
  const auto d = run_chain(split.train, cfg, 63);
  std::vector<double> full, pop, truth;
  for (const auto& held : split.heldout) {
    const SubjectSeries* train = nullptr;
    for (const auto& s : split.train)
      if (s.subject_id == held.subject_id) train = &s;
    REQUIRE(train != nullptr);
    const auto a = forecast_subject(d, *train, held.obs_ticks, 64);
    const auto b = population_only_forecast(d, *train, held.obs_ticks, 64);
    for (std::size_t k = 0; k < held.obs_ticks.size(); ++k) {
      full.push_back(a.y_mean[k]);
      pop.push_back(b.y_mean[k]);
      truth.push_back(ds.truth.at(held.subject_id, held.obs_ticks[k]).y_true);
    }
  }
  const std::vector<double> no_sd(truth.size(), 0.0);
  const auto sa = score(full, no_sd, truth, ScoreMode::Absolute);
  const auto sb = score(pop, no_sd, truth, ScoreMode::Absolute);
  MESSAGE("MAD individual " << sa.mad << " population " << sb.mad);
  CHECK(sa.mad < sb.mad);
}
