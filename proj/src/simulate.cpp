#include "jhgp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "jhgp/csv.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/survival.hpp"

namespace jhgp {

void SimConfig::validate() const {
  if (n_subjects < 1) throw UsageError("sim.n_subjects must be >= 1");
  if (n_ticks < 2) throw UsageError("sim.n_ticks must be >= 2");
  if (!(theta_psi > -1.0 && theta_psi < 1.0)) throw UsageError("sim.theta_psi must lie in (-1, 1)");
  if (!(sigma_y > 0.0)) throw UsageError("sim.sigma_y must be > 0");
  if (!(sigma_psi_lo > 0.0) || sigma_psi_hi < sigma_psi_lo) throw UsageError("sim.sigma_psi range must be positive");
  if (gamma_sd < 0.0 || noise_tau2 < 0.0 || noise_ratio < 0.0) throw UsageError("sim noise settings must be >= 0");
  if (mask_fraction < 0.0 || mask_fraction > 1.0) throw UsageError("sim.mask_fraction must lie in [0, 1]");
}

SimConfig SimConfig::preset(const std::string& name) {
  SimConfig c;
  if (name == "sim1") {
    c.theta_psi = -0.8;
    c.phi = 0.9;
  } else if (name == "sim2") {
    c.theta_psi = -0.5;
    c.phi = -0.3;
  } else if (name == "sim3") {
    c.theta_psi = -0.1;
    c.phi = 0.01;
  } else {
    throw UsageError("unknown preset '" + name + "' (expected sim1, sim2 or sim3)");
  }
  return c;
}

const TruthRow& SimTruth::at(const std::string& subject_id, Tick tick) const {
  for (const auto& r : rows) {
    if (r.subject_id == subject_id && r.tick == tick) return r;
  }
  throw DataError("truth has no row for subject '" + subject_id + "' at tick " + std::to_string(tick));
}

double latent_mu_y(double x) { return 50.0 * std::sin((x - 20.0) / 100.0) * std::cos((x - 10.0) / 15.0); }

double latent_mu_h(double x) { return 4.0 * std::sin((x - 10.0) / 5.0) * std::cos(x / 10.0); }

SimDataset simulate_dataset(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  SimDataset out;
  const auto n = static_cast<std::size_t>(cfg.n_subjects);
  out.truth.sigma_psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.truth.sigma_psi[i] = rng.uniform(cfg.sigma_psi_lo, cfg.sigma_psi_hi);

  double tau2 = cfg.noise_tau2;
  if (cfg.noise_ratio > 0.0) {
    double mean_s2 = 0.0;
    for (double s : out.truth.sigma_psi) mean_s2 += s * s;
    mean_s2 /= static_cast<double>(n);
    tau2 = cfg.noise_ratio * cfg.phi * cfg.phi * mean_s2;
  }
  out.truth.noise_tau2 = tau2;

  const double rho = cfg.theta_psi;
  const double innov = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    SubjectSeries s;
    s.subject_id = "S" + std::to_string(i + 1);
    const double gamma = rng.normal(0.0, cfg.gamma_sd);
    const double sd = out.truth.sigma_psi[i];
    double psi = 0.0;
    for (int k = 1; k <= cfg.n_ticks; ++k) {
      psi = k == 1 ? sd * rng.normal() : rho * psi + sd * innov * rng.normal();
      const double x = k;
      TruthRow row;
      row.subject_id = s.subject_id;
      row.tick = k;
      row.mu_y = latent_mu_y(x);
      row.mu_h = latent_mu_h(x);
      row.psi = psi;
      row.y_true = row.mu_y + gamma + psi;
      row.h_true = row.mu_h + cfg.phi * psi + (tau2 > 0.0 ? std::sqrt(tau2) * rng.normal() : 0.0);
      row.lambda = logit_inv(row.h_true);
      s.obs_ticks.push_back(k);
      s.y.push_back(row.y_true + cfg.sigma_y * rng.normal());
      s.event_ticks.push_back(k);
      s.r.push_back(rng.bernoulli(row.lambda) ? 1 : 0);
      out.truth.rows.push_back(row);
    }
    out.truth.subject_ids.push_back(s.subject_id);
    out.truth.gamma.push_back(gamma);
    out.data.push_back(std::move(s));
  }
  if (cfg.censor) out.data = apply_censoring(out.data, rng);
  return out;
}

SubjectSeries censor_subject(const SubjectSeries& s, double t_c) {
  const Tick first = s.first_tick();
  const double c = std::min(static_cast<double>(s.last_tick()), t_c);
  auto keep = [&](Tick t) { return static_cast<double>(t) <= c || t == first; };
  SubjectSeries out;
  out.subject_id = s.subject_id;
  for (std::size_t k = 0; k < s.obs_ticks.size(); ++k) {
    if (keep(s.obs_ticks[k])) {
      out.obs_ticks.push_back(s.obs_ticks[k]);
      out.y.push_back(s.y[k]);
    }
  }
  for (std::size_t k = 0; k < s.event_ticks.size(); ++k) {
    if (keep(s.event_ticks[k])) {
      out.event_ticks.push_back(s.event_ticks[k]);
      out.r.push_back(s.r[k]);
    }
  }
  return out;
}

std::vector<SubjectSeries> apply_censoring(const std::vector<SubjectSeries>& data, Rng& rng) {
  std::vector<SubjectSeries> out;
  out.reserve(data.size());
  for (const auto& s : data) {
    const double max_x = static_cast<double>(s.last_tick());
    out.push_back(censor_subject(s, rng.uniform(0.0, 2.0 * max_x)));
  }
  return out;
}

MaskSplit mask_second_half(const std::vector<SubjectSeries>& data, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("mask fraction must lie in (0, 1]");
  const std::size_t n = data.size();
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<char> chosen(n, 0);
  for (std::size_t i = 0; i < k; ++i) chosen[order[i]] = 1;

  MaskSplit out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = data[i];
    if (!chosen[i]) {
      out.train.push_back(s);
      continue;
    }
    std::set<Tick> ticks(s.obs_ticks.begin(), s.obs_ticks.end());
    ticks.insert(s.event_ticks.begin(), s.event_ticks.end());
    const std::size_t m = ticks.size();
    const std::size_t keep = m - m / 2;
    const Tick cut = *std::next(ticks.begin(), static_cast<std::ptrdiff_t>(keep - 1));
    SubjectSeries tr, ho;
    tr.subject_id = ho.subject_id = s.subject_id;
    for (std::size_t q = 0; q < s.obs_ticks.size(); ++q) {
      auto& dst = s.obs_ticks[q] <= cut ? tr : ho;
      dst.obs_ticks.push_back(s.obs_ticks[q]);
      dst.y.push_back(s.y[q]);
    }
    for (std::size_t q = 0; q < s.event_ticks.size(); ++q) {
      auto& dst = s.event_ticks[q] <= cut ? tr : ho;
      dst.event_ticks.push_back(s.event_ticks[q]);
      dst.r.push_back(s.r[q]);
    }
    out.train.push_back(std::move(tr));
    out.heldout.push_back(std::move(ho));
    out.masked_ids.push_back(s.subject_id);
  }
  return out;
}

void write_truth_csv(std::ostream& out, const SimTruth& truth) {
  out << "subject_id,tick,mu_y,mu_h,psi,lambda,y_true,h_true\n";
  for (const auto& r : truth.rows) {
    out << r.subject_id << ',' << r.tick << ',' << format_double(r.mu_y) << ',' << format_double(r.mu_h) << ','
        << format_double(r.psi) << ',' << format_double(r.lambda) << ',' << format_double(r.y_true) << ','
        << format_double(r.h_true) << '\n';
  }
}

SimTruth read_truth_csv(std::istream& in, const std::string& source) {
  const CsvTable t = read_csv_table(in, source);
  const std::vector<std::string> expected{"subject_id", "tick", "mu_y", "mu_h", "psi", "lambda", "y_true", "h_true"};
  if (t.header != expected) throw DataError(source + ": unexpected truth header");
  SimTruth truth;
  std::size_t row = 0;
  for (const auto& f : t.rows) {
    const std::string where = source + " row " + std::to_string(++row);
    TruthRow r;
    r.subject_id = f[0];
    r.tick = parse_integer(f[1], where);
    r.mu_y = parse_double(f[2], where);
    r.mu_h = parse_double(f[3], where);
    r.psi = parse_double(f[4], where);
    r.lambda = parse_double(f[5], where);
    r.y_true = parse_double(f[6], where);
    r.h_true = parse_double(f[7], where);
    if (truth.subject_ids.empty() || truth.subject_ids.back() != r.subject_id) truth.subject_ids.push_back(r.subject_id);
    truth.rows.push_back(std::move(r));
  }
  return truth;
}

}  // namespace jhgp
