#include "jhgp/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "jhgp/csv.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/gp_core.hpp"
#include "jhgp/survival.hpp"

namespace jhgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Tick> subset(const std::vector<Tick>& ticks, const std::vector<std::size_t>& idx) {
  std::vector<Tick> out;
  for (auto k : idx) out.push_back(ticks[k]);
  return out;
}

// Mean process at s: lookup on the grid, Kriging (noise free) off it.
// Returns the mean and covariance of the off-grid part; on-grid entries have 0 variance.
GaussianDist extend_mean(const Eigen::VectorXd& mu, const std::vector<Tick>& grid, const KernelSpec& k,
                         double sigma2, const std::vector<Tick>& s) {
  const auto ns = static_cast<Eigen::Index>(s.size());
  GaussianDist out{Eigen::VectorXd::Zero(ns), CovMatrix(Eigen::MatrixXd::Zero(ns, ns))};
  std::vector<std::size_t> off;
  for (std::size_t j = 0; j < s.size(); ++j) {
    auto it = std::lower_bound(grid.begin(), grid.end(), s[j]);
    if (it != grid.end() && *it == s[j]) {
      out.mean(static_cast<Eigen::Index>(j)) = mu(it - grid.begin());
    } else {
      off.push_back(j);
    }
  }
  if (off.empty()) return out;
  const std::vector<Tick> so = subset(s, off);
  const GaussianDist pred = krige(Eigen::VectorXd::Zero(mu.size()), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(so.size())),
                                  CovMatrix(sigma2 * realize(k, grid)), CovMatrix(sigma2 * realize(k, so)),
                                  sigma2 * realize(k, so, grid), mu, 0.0);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(ns, ns);
  for (std::size_t a = 0; a < off.size(); ++a) {
    out.mean(static_cast<Eigen::Index>(off[a])) = pred.mean(static_cast<Eigen::Index>(a));
    for (std::size_t b = 0; b < off.size(); ++b) {
      cov(static_cast<Eigen::Index>(off[a]), static_cast<Eigen::Index>(off[b])) =
          pred.cov.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  out.cov = CovMatrix(std::move(cov));
  return out;
}

KernelSpec with_hyper(KernelSpec k, const std::vector<double>& theta) {
  k.set_all_hyper(theta);
  return k;
}

Eigen::VectorXd draw(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
  if (mean.size() == 0) return mean;
  if (cov.cwiseAbs().maxCoeff() == 0.0) return mean;
  const Eigen::MatrixXd l = robust_cholesky(symmetrize(cov));
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + l.triangularView<Eigen::Lower>() * z;
}

struct Band {
  double mean, lo, hi, sd;
};

Band band(std::vector<double> v) {
  Band b{};
  const double n = static_cast<double>(v.size());
  b.mean = 0.0;
  for (double x : v) b.mean += x;
  b.mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - b.mean) * (x - b.mean);
  b.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  b.lo = quantile(v, 0.025);
  b.hi = quantile(std::move(v), 0.975);
  return b;
}

ForecastResult run_forecast(const PosteriorDraws& draws, const SubjectSeries& subject, const std::vector<Tick>& s,
                            std::uint64_t seed, bool individual) {
  if (draws.states.empty()) throw DomainError("forecast: no posterior draws");
  if (s.empty()) throw DomainError("forecast: no forecast ticks");
  const auto& l = draws.layout;
  const std::size_t ns = s.size();
  ForecastResult out;
  out.subject_id = subject.subject_id;
  out.ticks = s;
  out.has_y = l.mode != ModelMode::SurvivalOnly;
  out.has_lambda = l.mode != ModelMode::LongitudinalOnly;

  Rng rng(seed);
  std::vector<std::vector<double>> ys(ns), lams(ns);
  std::vector<double> pop(ns, 0.0);
  for (std::size_t d = 0; d < draws.states.size(); ++d) {
    const DrawPrediction p = predict_draw(draws, d, subject, s, individual);
    const auto& st = draws.states[d];
    // the mean processes are random off the grid; sample them with the path
    Eigen::VectorXd muy, muh;
    if (out.has_y) {
      const auto e = extend_mean(st.mu_y, l.global_ticks, with_hyper(l.mu_y_kernel, st.theta_mu_y), st.sigma2_mu_y, s);
      muy = draw(e.mean, e.cov.matrix(), rng);
    }
    if (out.has_lambda) {
      const auto e = extend_mean(st.mu_h, l.global_ticks, with_hyper(l.mu_h_kernel, st.theta_mu_h), st.sigma2_mu_h, s);
      muh = draw(e.mean, e.cov.matrix(), rng);
    }
    const Eigen::VectorXd psi = draw(p.psi_mean, p.psi_cov, rng);
    for (std::size_t j = 0; j < ns; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (out.has_y) {
        ys[j].push_back(muy(jj) + p.gamma + psi(jj));
        pop[j] += p.mu_y(jj) + p.gamma;
      }
      if (out.has_lambda) lams[j].push_back(logit_inv(p.eta + muh(jj) + p.phi * psi(jj)));
    }
  }
  const double nd = static_cast<double>(draws.states.size());
  for (std::size_t j = 0; j < ns; ++j) {
    if (out.has_y) {
      const Band b = band(ys[j]);
      out.y_mean.push_back(b.mean);
      out.y_lo.push_back(b.lo);
      out.y_hi.push_back(b.hi);
      out.y_sd.push_back(b.sd);
      out.pop_mean.push_back(pop[j] / nd);
    } else {
      out.y_mean.push_back(kNaN);
      out.y_lo.push_back(kNaN);
      out.y_hi.push_back(kNaN);
      out.y_sd.push_back(kNaN);
      out.pop_mean.push_back(kNaN);
    }
    if (out.has_lambda) {
      const Band b = band(lams[j]);
      out.lambda_mean.push_back(b.mean);
      out.lambda_lo.push_back(b.lo);
      out.lambda_hi.push_back(b.hi);
      out.lambda_sd.push_back(b.sd);
    } else {
      out.lambda_mean.push_back(kNaN);
      out.lambda_lo.push_back(kNaN);
      out.lambda_hi.push_back(kNaN);
      out.lambda_sd.push_back(kNaN);
    }
  }
  return out;
}

}  // namespace

DrawPrediction predict_draw(const PosteriorDraws& draws, std::size_t d, const SubjectSeries& subject,
                            const std::vector<Tick>& s, bool individual) {
  const auto& l = draws.layout;
  const auto& st = draws.states.at(d);
  const std::size_t i = l.subject_index(subject.subject_id);
  const auto ns = static_cast<Eigen::Index>(s.size());
  const bool has_y = l.mode != ModelMode::SurvivalOnly;
  const bool has_h = l.mode != ModelMode::LongitudinalOnly;

  DrawPrediction p;
  p.gamma = has_y ? st.gamma[i] : 0.0;
  p.eta = has_h ? st.eta[i] : 0.0;
  p.phi = st.phi;
  if (has_y) {
    p.mu_y = extend_mean(st.mu_y, l.global_ticks, with_hyper(l.mu_y_kernel, st.theta_mu_y), st.sigma2_mu_y, s).mean;
  }
  if (has_h) {
    p.mu_h = extend_mean(st.mu_h, l.global_ticks, with_hyper(l.mu_h_kernel, st.theta_mu_h), st.sigma2_mu_h, s).mean;
  }

  KernelSpec kp = l.psi_kernel;
  kp.set_all_hyper(st.theta_psi);
  kp.anchor = l.subject_ticks[i].front();
  const double s2 = st.prior.sigma2_psi[i];
  const Eigen::MatrixXd v_ss = s2 * realize(kp, s);
  if (!individual || s2 <= 0.0) {
    p.psi_mean = Eigen::VectorXd::Zero(ns);
    p.psi_cov = v_ss;
    return p;
  }
  if (has_y && !subject.obs_ticks.empty()) {
    // individual Kriging from the subject's longitudinal residuals
    const auto& t = subject.obs_ticks;
    const Eigen::VectorXd mu_t =
        extend_mean(st.mu_y, l.global_ticks, with_hyper(l.mu_y_kernel, st.theta_mu_y), st.sigma2_mu_y, t).mean;
    Eigen::VectorXd resid(static_cast<Eigen::Index>(t.size()));
    for (std::size_t q = 0; q < t.size(); ++q) {
      resid(static_cast<Eigen::Index>(q)) = subject.y[q] - mu_t(static_cast<Eigen::Index>(q)) - p.gamma;
    }
    const auto pred = krige(Eigen::VectorXd::Zero(resid.size()), Eigen::VectorXd::Zero(ns), CovMatrix(s2 * realize(kp, t)),
                            CovMatrix(v_ss), s2 * realize(kp, s, t), resid, st.prior.sigma2_y);
    p.psi_mean = pred.mean;
    p.psi_cov = pred.cov.matrix();
    return p;
  }
  // survival-only: condition on the draw's frailty path
  const auto& t = l.subject_ticks[i];
  const auto pred = krige(Eigen::VectorXd::Zero(st.psi[i].size()), Eigen::VectorXd::Zero(ns), CovMatrix(s2 * realize(kp, t)),
                          CovMatrix(v_ss), s2 * realize(kp, s, t), st.psi[i], 0.0);
  p.psi_mean = pred.mean;
  p.psi_cov = pred.cov.matrix();
  return p;
}

ForecastResult forecast_subject(const PosteriorDraws& draws, const SubjectSeries& subject, const std::vector<Tick>& s,
                                std::uint64_t seed) {
  return run_forecast(draws, subject, s, seed, true);
}

ForecastResult population_only_forecast(const PosteriorDraws& draws, const SubjectSeries& subject,
                                        const std::vector<Tick>& s, std::uint64_t seed) {
  return run_forecast(draws, subject, s, seed, false);
}

ArPaths ar_equivalence_check(double rho, const std::vector<double>& series, int steps) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("ar_equivalence_check: |rho| must be < 1");
  if (series.size() < 2) throw DomainError("ar_equivalence_check: series needs at least 2 points");
  ArPaths out;
  if (steps <= 0) return out;
  const auto n = static_cast<Tick>(series.size());
  std::vector<Tick> t(series.size()), s(static_cast<std::size_t>(steps));
  for (Tick k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = k + 1;
  for (int k = 0; k < steps; ++k) s[static_cast<std::size_t>(k)] = n + 1 + k;
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(series.data(), n);
  const auto pred = krige(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(steps), CovMatrix(ar1_correlation(rho, t, t)),
                          CovMatrix(ar1_correlation(rho, s, s)), ar1_correlation(rho, s, t), x, 0.0);
  double prev = series.back();
  for (int k = 0; k < steps; ++k) {
    out.krige.push_back(pred.mean(k));
    prev *= rho;
    out.recursion.push_back(prev);
  }
  return out;
}

FittedHazard fitted_hazard(const PosteriorDraws& draws, const std::vector<SubjectSeries>& data) {
  const auto& l = draws.layout;
  if (l.mode == ModelMode::LongitudinalOnly) throw DomainError("fitted_hazard: draws carry no survival channel");
  if (draws.states.empty()) throw DomainError("fitted_hazard: no posterior draws");
  FittedHazard out;
  for (const auto& s : data) {
    if (!s.has_events()) continue;
    auto it = std::find(l.subject_ids.begin(), l.subject_ids.end(), s.subject_id);
    if (it == l.subject_ids.end()) continue;  // excluded during fitting
    const auto i = static_cast<std::size_t>(it - l.subject_ids.begin());
    const EventGrid eg = build_event_grid(s);
    for (std::size_t k = 0; k < eg.size(); ++k) {
      const Tick t = eg.tick_at(k);
      const auto& st_ticks = l.subject_ticks[i];
      const auto pos = std::lower_bound(st_ticks.begin(), st_ticks.end(), t);
      if (pos == st_ticks.end() || *pos != t) throw DataError("fitted_hazard: tick missing from the fitted grid");
      const auto slot = static_cast<Eigen::Index>(pos - st_ticks.begin());
      const auto g = static_cast<Eigen::Index>(
          std::lower_bound(l.global_ticks.begin(), l.global_ticks.end(), t) - l.global_ticks.begin());
      double acc = 0.0;
      for (const auto& st : draws.states) acc += logit_inv(st.eta[i] + st.mu_h(g) + st.phi * st.psi[i](slot));
      out.subject_id.push_back(s.subject_id);
      out.tick.push_back(t);
      out.lambda_mean.push_back(acc / static_cast<double>(draws.states.size()));
      out.r.push_back(eg.r[k]);
      const auto yo = std::find(s.obs_ticks.begin(), s.obs_ticks.end(), t);
      out.y.push_back(yo == s.obs_ticks.end() ? kNaN : s.y[static_cast<std::size_t>(yo - s.obs_ticks.begin())]);
    }
  }
  return out;
}

namespace {

std::string na(double v) { return std::isnan(v) ? std::string("NA") : format_double(v); }

}  // namespace

void write_forecast_csv(std::ostream& out, const std::vector<ForecastResult>& results) {
  out << "subject_id,tick,y_mean,y_lo,y_hi,lambda_mean,lambda_lo,lambda_hi,pop_mean\n";
  for (const auto& r : results) {
    for (std::size_t j = 0; j < r.ticks.size(); ++j) {
      out << r.subject_id << ',' << r.ticks[j] << ',' << na(r.y_mean[j]) << ',' << na(r.y_lo[j]) << ','
          << na(r.y_hi[j]) << ',' << na(r.lambda_mean[j]) << ',' << na(r.lambda_lo[j]) << ','
          << na(r.lambda_hi[j]) << ',' << na(r.pop_mean[j]) << '\n';
    }
  }
}

std::vector<ForecastResult> read_forecast_csv(std::istream& in, const std::string& source) {
  const CsvTable t = read_csv_table(in, source);
  const std::vector<std::string> expected{"subject_id", "tick",      "y_mean",    "y_lo",    "y_hi",
                                          "lambda_mean", "lambda_lo", "lambda_hi", "pop_mean"};
  if (t.header != expected) throw DataError(source + ": unexpected forecast header");
  std::vector<ForecastResult> out;
  std::size_t row = 0;
  for (const auto& f : t.rows) {
    const std::string where = source + " row " + std::to_string(++row);
    if (out.empty() || out.back().subject_id != f[0]) {
      out.emplace_back();
      out.back().subject_id = f[0];
    }
    auto& r = out.back();
    r.ticks.push_back(parse_integer(f[1], where));
    r.y_mean.push_back(parse_double(f[2], where));
    r.y_lo.push_back(parse_double(f[3], where));
    r.y_hi.push_back(parse_double(f[4], where));
    r.lambda_mean.push_back(parse_double(f[5], where));
    r.lambda_lo.push_back(parse_double(f[6], where));
    r.lambda_hi.push_back(parse_double(f[7], where));
    r.pop_mean.push_back(parse_double(f[8], where));
    // the CSV carries intervals only; approximate the sd from the 95% band
    r.y_sd.push_back((r.y_hi.back() - r.y_lo.back()) / 3.919927969080108);
    r.lambda_sd.push_back((r.lambda_hi.back() - r.lambda_lo.back()) / 3.919927969080108);
    r.has_y = !std::isnan(r.y_mean.back());
    r.has_lambda = !std::isnan(r.lambda_mean.back());
  }
  return out;
}

}  // namespace jhgp
