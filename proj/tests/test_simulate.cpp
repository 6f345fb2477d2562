#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "jhgp/data_model.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/metrics.hpp"
#include "jhgp/simulate.hpp"

using namespace jhgp;
using doctest::Approx;

namespace {

SubjectSeries full_subject(const std::string& id, int ticks) {
  SubjectSeries s;
  s.subject_id = id;
  for (int k = 1; k <= ticks; ++k) {
    s.obs_ticks.push_back(k);
    s.y.push_back(0.1 * k);
    s.event_ticks.push_back(k);
    s.r.push_back(0);
  }
  return s;
}

}  // namespace

TEST_CASE("latent mean functions") {
  CHECK(latent_mu_y(20.0) == Approx(0.0));
  CHECK(latent_mu_y(10.0) == Approx(-4.9917).epsilon(1e-4));
  CHECK(latent_mu_y(10.0) == Approx(50.0 * std::sin(-0.1)).epsilon(1e-14));
  CHECK(latent_mu_y(25.0) == Approx(50.0 * std::sin(0.05) * std::cos(1.0)).epsilon(1e-14));
  CHECK(std::abs(latent_mu_y(25.0) - 1.3505) < 5e-4);
  CHECK(latent_mu_h(10.0) == Approx(0.0));
  CHECK(std::abs(latent_mu_h(5.0 * std::numbers::pi)) < 1e-12);
  CHECK(latent_mu_h(15.0) == Approx(0.2381).epsilon(1e-3));
}

TEST_CASE("presets and validation") {
  CHECK(SimConfig::preset("sim1").theta_psi == -0.8);
  CHECK(SimConfig::preset("sim2").phi == -0.3);
  CHECK(SimConfig::preset("sim3").phi == 0.01);
  CHECK_THROWS_AS(SimConfig::preset("sim9"), UsageError);
  SimConfig c;
  c.n_ticks = 1;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = SimConfig{};
  c.sigma_psi_hi = 0.1;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("simulated dataset shape and latent means") {
  SimConfig c = SimConfig::preset("sim1");
  Rng rng(3);
  const auto ds = simulate_dataset(c, rng);
  REQUIRE(ds.data.size() == 50);
  CHECK(ds.truth.rows.size() == 50u * 25u);
  for (const auto& s : ds.data) {
    CHECK(s.obs_ticks.size() == 25);
    CHECK(s.event_ticks.size() == 25);
    CHECK(s.obs_ticks.front() == 1);
    CHECK(s.obs_ticks.back() == 25);
  }
  for (const auto& r : ds.truth.rows) {
    CHECK(r.mu_y == latent_mu_y(static_cast<double>(r.tick)));
    CHECK(r.mu_h == latent_mu_h(static_cast<double>(r.tick)));
    CHECK(r.lambda > 0.0);
    CHECK(r.lambda < 1.0);
  }
  for (double s : ds.truth.sigma_psi) {
    CHECK(s >= 0.5);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("pooled psi has the AR(1) lag-1 autocorrelation") {
  SimConfig c = SimConfig::preset("sim1");
  Rng rng(4);
  const auto ds = simulate_dataset(c, rng);
  std::vector<double> a, b;
  for (const auto& id : ds.truth.subject_ids) {
    for (Tick t = 2; t <= 25; ++t) {
      a.push_back(ds.truth.at(id, t - 1).psi);
      b.push_back(ds.truth.at(id, t).psi);
    }
  }
  const double r = pearson(a, b);
  CHECK(r > -0.85);
  CHECK(r < -0.70);
}

TEST_CASE("point sigma range: marginal and increment sd match AR(1)") {
  SimConfig c = SimConfig::preset("sim2");
  c.sigma_psi_lo = c.sigma_psi_hi = 0.7;
  c.n_subjects = 400;
  Rng rng(5);
  const auto ds = simulate_dataset(c, rng);
  double ss = 0.0, inc = 0.0;
  std::size_t n = 0, ni = 0;
  for (const auto& id : ds.truth.subject_ids) {
    for (Tick t = 1; t <= 25; ++t) {
      const double p = ds.truth.at(id, t).psi;
      ss += p * p;
      ++n;
      if (t > 1) {
        const double d = p - ds.truth.at(id, t - 1).psi;
        inc += d * d;
        ++ni;
      }
    }
  }
  CHECK(std::sqrt(ss / n) == Approx(0.7).epsilon(0.05));
  CHECK(std::sqrt(inc / ni) == Approx(0.7 * std::sqrt(2.0 * (1.0 - c.theta_psi))).epsilon(0.05));
}

TEST_CASE("phi = 0 decouples the channels") {
  SimConfig c = SimConfig::preset("sim1");
  c.phi = 0.0;
  Rng rng(6);
  const auto ds = simulate_dataset(c, rng);
  std::vector<double> psi, h;
  for (const auto& r : ds.truth.rows) {
    psi.push_back(r.psi);
    h.push_back(r.h_true - r.mu_h);
  }
  // H - mu_h is identically zero here; correlation is taken as 0
  double spread = 0.0;
  for (double v : h) spread = std::max(spread, std::abs(v));
  CHECK(spread == 0.0);
  c.noise_tau2 = 1.0;
  c.n_subjects = 400;  // keeps the sampling sd of r near 0.014
  Rng rng2(6);
  const auto noisy = simulate_dataset(c, rng2);
  psi.clear();
  h.clear();
  for (const auto& r : noisy.truth.rows) {
    psi.push_back(r.psi);
    h.push_back(r.h_true - r.mu_h);
  }
  CHECK(std::abs(pearson(psi, h)) < 0.05);
}

TEST_CASE("event frequency matches the mean hazard") {
  SimConfig c = SimConfig::preset("sim1");
  Rng rng(7);
  const auto ds = simulate_dataset(c, rng);
  double events = 0.0, lam = 0.0, var = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ds.data.size(); ++i) {
    for (std::size_t k = 0; k < ds.data[i].r.size(); ++k) {
      const double l = ds.truth.at(ds.data[i].subject_id, ds.data[i].event_ticks[k]).lambda;
      events += ds.data[i].r[k];
      lam += l;
      var += l * (1 - l);
      ++n;
    }
  }
  CHECK(std::abs(events - lam) < 3.0 * std::sqrt(var));
}

TEST_CASE("noise ratio sets the survival noise from the realised scales") {
  SimConfig c = SimConfig::preset("sim1");
  c.phi = 0.5;
  c.noise_ratio = 4.0;
  Rng rng(8);
  const auto ds = simulate_dataset(c, rng);
  double m = 0.0;
  for (double s : ds.truth.sigma_psi) m += s * s;
  m /= static_cast<double>(ds.truth.sigma_psi.size());
  CHECK(ds.truth.noise_tau2 == Approx(4.0 * 0.25 * m).epsilon(1e-12));
}

TEST_CASE("simulation is deterministic given the seed") {
  SimConfig c = SimConfig::preset("sim2");
  c.censor = true;
  Rng a(9), b(9);
  const auto x = simulate_dataset(c, a);
  const auto y = simulate_dataset(c, b);
  std::ostringstream lx, ly, tx, ty;
  write_longitudinal_csv(lx, x.data);
  write_longitudinal_csv(ly, y.data);
  write_truth_csv(tx, x.truth);
  write_truth_csv(ty, y.truth);
  CHECK(lx.str() == ly.str());
  CHECK(tx.str() == ty.str());
  Rng d(10);
  std::ostringstream lz;
  write_longitudinal_csv(lz, simulate_dataset(c, d).data);
  CHECK(lz.str() != lx.str());
}

TEST_CASE("truth CSV round-trip") {
  SimConfig c = SimConfig::preset("sim3");
  c.n_subjects = 3;
  Rng rng(11);
  const auto ds = simulate_dataset(c, rng);
  std::ostringstream os;
  write_truth_csv(os, ds.truth);
  CHECK(os.str().rfind("subject_id,tick,mu_y,mu_h,psi,lambda,y_true,h_true\n", 0) == 0);
  std::istringstream is(os.str());
  const auto back = read_truth_csv(is);
  REQUIRE(back.rows.size() == ds.truth.rows.size());
  for (std::size_t k = 0; k < back.rows.size(); ++k) {
    CHECK(back.rows[k].subject_id == ds.truth.rows[k].subject_id);
    CHECK(back.rows[k].psi == ds.truth.rows[k].psi);
    CHECK(back.rows[k].lambda == ds.truth.rows[k].lambda);
  }
  CHECK_THROWS_AS(back.at("nobody", 1), DataError);
}

TEST_CASE("censoring: clamping and boundary") {
  const auto s = full_subject("a", 25);
  const auto same = censor_subject(s, 60.0);
  CHECK(same.obs_ticks == s.obs_ticks);
  CHECK(same.event_ticks == s.event_ticks);
  const auto zero = censor_subject(s, 0.0);
  CHECK(zero.obs_ticks.size() + zero.event_ticks.size() >= 1);
  CHECK(zero.obs_ticks.size() <= 1);
  const auto mid = censor_subject(s, 10.5);
  CHECK(mid.obs_ticks.back() == 10);
  CHECK(mid.event_ticks.back() == 10);
}

TEST_CASE("censoring hits about half of the subjects") {
  std::vector<SubjectSeries> data;
  for (int i = 0; i < 10000; ++i) data.push_back(full_subject("c" + std::to_string(i), 25));
  Rng rng(12);
  const auto out = apply_censoring(data, rng);
  REQUIRE(out.size() == data.size());
  std::size_t censored = 0;
  for (const auto& s : out) censored += s.last_tick() < 25;
  const double frac = static_cast<double>(censored) / 10000.0;
  CHECK(frac > 0.48);
  CHECK(frac < 0.52);
}

TEST_CASE("masking the later half") {
  SUBCASE("fraction 1, 24 ticks") {
    Rng rng(13);
    const auto m = mask_second_half({full_subject("a", 24)}, 1.0, rng);
    REQUIRE(m.masked_ids.size() == 1);
    CHECK(m.train[0].obs_ticks.size() == 12);
    CHECK(m.heldout[0].obs_ticks.size() == 12);
    CHECK(m.train[0].obs_ticks.back() == 12);
    CHECK(m.heldout[0].obs_ticks.front() == 13);
  }
  SUBCASE("fraction 0.5 of 38 subjects") {
    std::vector<SubjectSeries> data;
    for (int i = 0; i < 38; ++i) data.push_back(full_subject("m" + std::to_string(i), 9));
    Rng rng(14);
    const auto m = mask_second_half(data, 0.5, rng);
    CHECK(m.masked_ids.size() == 19);
    CHECK(m.heldout.size() == 19);
    CHECK(m.train.size() == 38);
    // partition: every record lands on exactly one side
    std::map<std::string, std::size_t> count;
    for (const auto& s : m.train) count[s.subject_id] += s.obs_ticks.size() + s.event_ticks.size();
    for (const auto& s : m.heldout) count[s.subject_id] += s.obs_ticks.size() + s.event_ticks.size();
    for (const auto& s : data) CHECK(count[s.subject_id] == s.obs_ticks.size() + s.event_ticks.size());
    std::set<std::string> ids(m.masked_ids.begin(), m.masked_ids.end());
    CHECK(ids.size() == 19);
    for (const auto& s : m.train) {
      if (ids.count(s.subject_id)) {
        CHECK(s.obs_ticks.back() == 5);  // ceil(9 / 2)
      } else {
        CHECK(s.obs_ticks.size() == 9);
      }
    }
  }
}
