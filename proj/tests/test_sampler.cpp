#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "jhgp/errors.hpp"
#include "jhgp/gp_core.hpp"
#include "jhgp/kernels.hpp"
#include "jhgp/sampler.hpp"
#include "jhgp/simulate.hpp"
#include "jhgp/survival.hpp"
#include "support/sampler_checks.hpp"

using namespace jhgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using checks::small_data;

namespace {

struct Moments {
  std::vector<double> sum, sum2;
  long n = 0;
  void add(const VectorXd& v) {
    if (sum.empty()) sum.assign(static_cast<std::size_t>(v.size()), 0.0), sum2 = sum;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      sum[static_cast<std::size_t>(k)] += v(k);
      sum2[static_cast<std::size_t>(k)] += v(k) * v(k);
    }
    ++n;
  }
  double mean(std::size_t k) const { return sum[k] / n; }
  double var(std::size_t k) const { return (sum2[k] - sum[k] * sum[k] / n) / (n - 1); }
};

SamplerConfig short_cfg(ModelMode mode) {
  SamplerConfig c;
  c.mode = mode;
  c.iterations = 300;
  c.burn_in = 100;
  c.thin = 4;
  return c;
}

}  // namespace

TEST_CASE("mode names round-trip and reject unknown names") {
  for (auto m : {ModelMode::Joint, ModelMode::LongitudinalOnly, ModelMode::SurvivalOnly})
    CHECK(model_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(model_mode_from_string("bogus"), UsageError);
}

TEST_CASE("config validation") {
  SamplerConfig c;
  c.burn_in = c.iterations;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = SamplerConfig{};
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("init_state: subject equal to the cross-subject mean has zero residuals") {
  SubjectSeries s{"a", {1, 2, 3}, {0.5, -1.0, 2.0}, {}, {}};
  SamplerConfig cfg = short_cfg(ModelMode::LongitudinalOnly);
  GibbsSampler g(ModelData::build({s}, cfg.mode), cfg);
  const ModelState st = g.init_state();
  CHECK(st.gamma[0] == doctest::Approx(0.0));
  CHECK(st.psi[0].norm() < 1e-12);
  CHECK(st.mu_y(1) == doctest::Approx(-1.0));
  CHECK(st.prior.sigma2_psi[0] == cfg.variance_floor);
}

TEST_CASE("init_state: all-zero data gives zero latents and floored variances") {
  std::vector<SubjectSeries> data;
  for (int i = 0; i < 3; ++i) data.push_back({"z" + std::to_string(i), {1, 2, 3, 4}, {0, 0, 0, 0}, {1, 2, 3, 4}, {0, 0, 0, 0}});
  SamplerConfig cfg = short_cfg(ModelMode::Joint);
  GibbsSampler g(ModelData::build(data, cfg.mode), cfg);
  const ModelState st = g.init_state();
  CHECK(st.mu_y.norm() == 0.0);
  CHECK(st.mu_h.norm() == 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(st.psi[i].norm() == 0.0);
    CHECK(st.gamma[i] == 0.0);
    CHECK(st.eta[i] == 0.0);
    CHECK(st.prior.sigma2_psi[i] == cfg.variance_floor);
  }
  CHECK(st.phi == 0.0);
  CHECK(st.prior.sigma2_y == cfg.variance_floor);
  CHECK(st.sigma2_mu_y == cfg.variance_floor);
  CHECK(st.prior.g_gamma == cfg.variance_floor);
}

TEST_CASE("init_state: documented defaults") {
  SamplerConfig cfg = short_cfg(ModelMode::Joint);
  GibbsSampler g(ModelData::build(small_data(), cfg.mode), cfg);
  const ModelState st = g.init_state();
  REQUIRE(st.theta_psi.size() == 1);
  CHECK(st.theta_psi[0] == -0.5);
  // span 5 ticks -> max(5 / 4, 1)
  CHECK(st.theta_mu_y[0] == doctest::Approx(1.25));
  CHECK(st.theta_mu_h[0] == doctest::Approx(1.25));
  CHECK(st.mu_y.size() == 6);
  CHECK(st.psi[0].size() == 6);
}

TEST_CASE("init_state: mean estimate beats the zero vector on simulated data") {
  SimConfig sc = SimConfig::preset("sim1");
  Rng rng(7);
  const auto ds = simulate_dataset(sc, rng);
  SamplerConfig cfg = short_cfg(ModelMode::Joint);
  GibbsSampler g(ModelData::build(ds.data, cfg.mode), cfg);
  const ModelState st = g.init_state();
  double e_init = 0.0, e_zero = 0.0;
  const auto& ticks = g.data().grid.ticks;
  for (std::size_t t = 0; t < ticks.size(); ++t) {
    const double truth = ds.truth.at(ds.truth.subject_ids[0], ticks[t]).mu_y;
    e_init += std::pow(st.mu_y(static_cast<Eigen::Index>(t)) - truth, 2);
    e_zero += truth * truth;
  }
  CHECK(e_init < e_zero);
}

TEST_CASE("subjects with fewer than two observations are excluded with a warning") {
  auto data = small_data();
  data.push_back({"lone", {3}, {1.0}, {3}, {0}});
  const auto md = ModelData::build(data, ModelMode::Joint);
  CHECK(md.subjects.size() == 3);
  REQUIRE(md.warnings.size() == 1);
  CHECK(md.warnings[0].find("lone") != std::string::npos);
  // survival-only does not need Y
  CHECK(ModelData::build(data, ModelMode::SurvivalOnly).subjects.size() == 4);
}

TEST_CASE("closed-form blocks leave their analytic conditionals invariant") {
  for (const auto& b : checks::all_block_checks(11)) {
    CAPTURE(b.name);
    CAPTURE(b.worst_mean_z);
    CAPTURE(b.worst_var_z);
    CHECK(b.draws == 10000);
    CHECK(b.closed_form_gap < 1e-8);
    CHECK(b.worst_mean_z < 3.0);
    CHECK(b.worst_var_z < 3.0);
  }
}

TEST_CASE("reduced modes leave the other channel untouched") {
  Rng rng(21);
  {
    SamplerConfig cfg = short_cfg(ModelMode::LongitudinalOnly);
    GibbsSampler g(ModelData::build(small_data(), cfg.mode), cfg);
    ModelState s = g.init_state();
    const ModelState before = s;
    for (int it = 0; it < 50; ++it) g.sweep(s, rng);
    CHECK(s.mu_h.size() == 0);
    CHECK(s.eta == before.eta);
    CHECK(s.phi == before.phi);
    CHECK(s.prior.g_eta == before.prior.g_eta);
    for (std::size_t i = 0; i < s.omega.size(); ++i) CHECK(s.omega[i] == before.omega[i]);
    CHECK(!(s.mu_y == before.mu_y));
  }
  {
    SamplerConfig cfg = short_cfg(ModelMode::SurvivalOnly);
    GibbsSampler g(ModelData::build(small_data(), cfg.mode), cfg);
    ModelState s = g.init_state();
    const ModelState before = s;
    for (int it = 0; it < 50; ++it) g.sweep(s, rng);
    CHECK(s.mu_y.size() == 0);
    CHECK(s.gamma == before.gamma);
    CHECK(s.prior.sigma2_y == before.prior.sigma2_y);
    CHECK(s.prior.g_gamma == before.prior.g_gamma);
    CHECK(s.phi == 1.0);
    CHECK(!(s.mu_h == before.mu_h));
  }
}

TEST_CASE("variances stay positive through sweeps") {
  SamplerConfig cfg = short_cfg(ModelMode::Joint);
  GibbsSampler g(ModelData::build(small_data(), cfg.mode), cfg);
  Rng rng(22);
  ModelState s = g.init_state();
  for (int it = 0; it < 200; ++it) {
    g.sweep(s, rng);
    CHECK(s.prior.sigma2_y > 0.0);
    CHECK(s.sigma2_mu_y > 0.0);
    CHECK(s.sigma2_mu_h > 0.0);
    CHECK(s.prior.tau2 > 0.0);
    for (double v : s.prior.sigma2_psi) CHECK(v > 0.0);
    CHECK(s.theta_psi[0] > -1.0);
    CHECK(s.theta_psi[0] < 0.0);
  }
}

TEST_CASE("mu_y contracts below its prior sd on noise-free data") {
  SimConfig sc = SimConfig::preset("sim1");
  sc.n_subjects = 20;
  sc.sigma_y = 1e-3;
  Rng sim(31);
  const auto ds = simulate_dataset(sc, sim);
  SamplerConfig cfg = short_cfg(ModelMode::LongitudinalOnly);
  cfg.sample_mean_variances = false;
  cfg.init_sigma2_mu_y = 1.0;
  GibbsSampler g(ModelData::build(ds.data, cfg.mode), cfg);
  Rng rng(32);
  ModelState s = g.init_state();
  Moments m;
  for (int it = 0; it < 500; ++it) {
    g.sweep(s, rng);
    m.add(s.mu_y);
  }
  for (std::size_t t = 0; t < m.sum.size(); ++t) CHECK(std::sqrt(m.var(t)) < 1.0);
}

TEST_CASE("survival-only with no events shrinks every hazard below one half") {
  std::vector<SubjectSeries> data;
  for (int i = 0; i < 6; ++i) data.push_back({"n" + std::to_string(i), {}, {}, {1, 2, 3, 4, 5, 6, 7, 8}, std::vector<int>(8, 0)});
  SamplerConfig cfg = short_cfg(ModelMode::SurvivalOnly);
  cfg.iterations = 600;
  cfg.burn_in = 200;
  const auto draws = run_chain(data, cfg, 41);
  GibbsSampler g(ModelData::build(data, cfg.mode), cfg);
  for (std::size_t i = 0; i < g.data().subjects.size(); ++i) {
    const auto n = g.data().subjects[i].size();
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (const auto& st : draws.states) acc += logit_inv(g.logit_hazard(st, i)(static_cast<Eigen::Index>(k)));
      CHECK(acc / draws.size() < 0.5);
    }
  }
}

TEST_CASE("run_chain: snapshot count, iteration stamps, determinism") {
  SamplerConfig cfg = short_cfg(ModelMode::Joint);
  cfg.iterations = 103;
  cfg.burn_in = 20;
  cfg.thin = 4;
  const auto a = run_chain(small_data(), cfg, 99);
  CHECK(a.size() == static_cast<std::size_t>((103 - 20) / 4));
  CHECK(a.iteration_of.front() == 24);
  CHECK(a.iteration_of.back() == 100);
  CHECK(a.chains.size() == 1);
  CHECK(a.chains[0].seed == 99);
  CHECK(a.chains[0].acceptance.count("theta_psi") == 1);

  const auto b = run_chain(small_data(), cfg, 99);
  REQUIRE(b.size() == a.size());
  for (std::size_t d = 0; d < a.size(); ++d) CHECK(a.states[d] == b.states[d]);
  CHECK(a.chains[0] == b.chains[0]);

  const auto c = run_chain(small_data(), cfg, 100);
  CHECK(!(c.states.back() == a.states.back()));
}

TEST_CASE("run_chains merges chains in order and matches single runs") {
  SamplerConfig cfg = short_cfg(ModelMode::LongitudinalOnly);
  const auto all = run_chains(small_data(), cfg, 5, 3);
  const std::size_t per = static_cast<std::size_t>((cfg.iterations - cfg.burn_in) / cfg.thin);
  REQUIRE(all.size() == 3 * per);
  CHECK(all.chain_of.front() == 0);
  CHECK(all.chain_of.back() == 2);
  for (int c = 0; c < 3; ++c) {
    const auto single = run_chain(small_data(), cfg, 5, c);
    const auto part = all.chain(c);
    REQUIRE(part.size() == per);
    for (std::size_t d = 0; d < per; ++d) CHECK(part.states[d] == single.states[d]);
  }
  CHECK(!(all.chain(0).states.back() == all.chain(1).states.back()));
  CHECK_THROWS_AS(run_chains(small_data(), cfg, 5, 0), UsageError);
}

TEST_CASE("flatten / unflatten round-trip in every mode") {
  for (auto mode : {ModelMode::Joint, ModelMode::LongitudinalOnly, ModelMode::SurvivalOnly}) {
    CAPTURE(to_string(mode));
    SamplerConfig cfg = short_cfg(mode);
    cfg.keep_omega = true;
    const auto d = run_chain(small_data(), cfg, 3);
    const auto names = state_column_names(d.layout);
    const auto flat = flatten_state(d.states.back(), d.layout);
    REQUIRE(flat.size() == names.size());
    std::vector<double> values;
    for (std::size_t k = 0; k < flat.size(); ++k) {
      CHECK(flat[k].first == names[k]);
      values.push_back(flat[k].second);
    }
    const ModelState back = unflatten_state(values, d.layout);
    const auto again = flatten_state(back, d.layout);
    for (std::size_t k = 0; k < flat.size(); ++k) CHECK(again[k].second == flat[k].second);
    values.push_back(0.0);
    CHECK_THROWS_AS(unflatten_state(values, d.layout), DataError);
  }
}

TEST_CASE("summaries") {
  SUBCASE("constant chain has a zero-width interval") {
    const auto rows = summarize_columns({"c"}, {std::vector<double>(200, 2.5)});
    CHECK(rows[0].mean == 2.5);
    CHECK(rows[0].sd == 0.0);
    CHECK(rows[0].q025 == 2.5);
    CHECK(rows[0].q975 == 2.5);
  }
  SUBCASE("two draws") {
    const auto rows = summarize_columns({"x"}, {{0.0, 1.0}});
    CHECK(rows[0].mean == 0.5);
    CHECK(rows[0].q025 == doctest::Approx(0.025));
  }
  SUBCASE("empty draws are an error") {
    CHECK_THROWS(summarize(PosteriorDraws{}));
    CHECK_THROWS(summarize_columns({"x"}, {{}}));
  }
  SUBCASE("summary rows cover per-tick means and baseline hazard") {
    const auto d = run_chain(small_data(), short_cfg(ModelMode::Joint), 8);
    const auto rows = summarize(d);
    int lambda0 = 0, mu_y = 0, phi = 0;
    for (const auto& r : rows) {
      lambda0 += r.name.rfind("lambda0[", 0) == 0;
      mu_y += r.name.rfind("mu_y[", 0) == 0;
      phi += r.name == "phi";
      CHECK(r.q025 <= r.mean + 1e-12);
      CHECK(r.mean <= r.q975 + 1e-12);
    }
    CHECK(lambda0 == 6);
    CHECK(mu_y == 6);
    CHECK(phi == 1);
  }
  SUBCASE("quantile type 7") {
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
    CHECK(quantile({1.0}, 0.9) == 1.0);
  }
}

TEST_CASE("Metropolis acceptance after adaptation lands in (0.1, 0.6) on sim1") {
  SimConfig sc = SimConfig::preset("sim1");
  Rng sim(51);
  const auto ds = simulate_dataset(sc, sim);
  SamplerConfig cfg;
  cfg.iterations = 2000;
  cfg.burn_in = 1000;
  cfg.thin = 10;
  const auto d = run_chain(ds.data, cfg, 52);
  for (const char* block : {"theta_psi", "theta_mu_y", "theta_mu_h"}) {
    CAPTURE(block);
    REQUIRE(d.chains[0].acceptance.count(block) == 1);
    const double a = d.chains[0].acceptance.at(block);
    CHECK(a > 0.1);
    CHECK(a < 0.6);
  }
}
