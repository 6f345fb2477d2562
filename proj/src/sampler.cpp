#include "jhgp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <thread>

#include "jhgp/errors.hpp"
#include "jhgp/gp_core.hpp"
#include "jhgp/survival.hpp"

namespace jhgp {

std::string to_string(ModelMode m) {
  switch (m) {
    case ModelMode::Joint: return "jhgp";
    case ModelMode::LongitudinalOnly: return "hgp-only";
    case ModelMode::SurvivalOnly: return "survival-only";
  }
  return "?";
}

ModelMode model_mode_from_string(const std::string& s) {
  if (s == "jhgp" || s == "joint") return ModelMode::Joint;
  if (s == "hgp-only" || s == "longitudinal-only") return ModelMode::LongitudinalOnly;
  if (s == "survival-only") return ModelMode::SurvivalOnly;
  throw UsageError("unknown model mode '" + s + "' (expected jhgp, hgp-only or survival-only)");
}

void SamplerConfig::validate() const {
  if (iterations < 1) throw UsageError("mcmc.iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) throw UsageError("mcmc.burn_in must lie in [0, iterations)");
  if (thin < 1) throw UsageError("mcmc.thin must be >= 1");
  if (!(variance_floor > 0.0)) throw UsageError("model.variance_floor must be > 0");
  if (adapt_interval < 1) throw UsageError("mcmc.adapt_interval must be >= 1");
  psi_kernel.validate();
  if (mu_y_kernel) mu_y_kernel->validate();
  if (mu_h_kernel) mu_h_kernel->validate();
}

std::map<std::string, std::string> SamplerConfig::echo() const {
  std::map<std::string, std::string> e;
  e["model.mode"] = to_string(mode);
  e["mcmc.iterations"] = std::to_string(iterations);
  e["mcmc.burn_in"] = std::to_string(burn_in);
  e["mcmc.thin"] = std::to_string(thin);
  e["model.psi_kernel"] = psi_kernel.to_text();
  e["model.mu_y_kernel"] = mu_y_kernel ? mu_y_kernel->to_text() : "auto";
  e["model.mu_h_kernel"] = mu_h_kernel ? mu_h_kernel->to_text() : "auto";
  e["model.psi_hyper_prior"] = psi_hyper_prior == PsiHyperPrior::Jeffreys ? "jeffreys" : "uniform";
  e["model.g_phi"] = format_double(g_phi);
  e["model.mu_phi"] = format_double(mu_phi);
  e["model.sample_phi_hyper"] = sample_phi_hyper ? "true" : "false";
  e["model.variance_floor"] = format_double(variance_floor);
  e["mcmc.target_accept"] = format_double(target_accept);
  e["mcmc.adapt_interval"] = std::to_string(adapt_interval);
  e["mcmc.keep_omega"] = keep_omega ? "true" : "false";
  return e;
}

// ---------------------------------------------------------------------------
// data layout

ModelData ModelData::build(const std::vector<SubjectSeries>& data, ModelMode mode) {
  ModelData md;
  md.mode = mode;
  const bool use_y = mode != ModelMode::SurvivalOnly;
  const bool use_r = mode != ModelMode::LongitudinalOnly;
  for (const auto& s : data) {
    s.validate();
    if (use_y && s.obs_ticks.size() < 2) {
      md.warnings.push_back("subject '" + s.subject_id + "' excluded: fewer than 2 longitudinal observations");
      continue;
    }
    if (mode == ModelMode::SurvivalOnly && !s.has_events()) {
      md.warnings.push_back("subject '" + s.subject_id + "' excluded: no event records");
      continue;
    }
    std::map<Tick, std::pair<int, int>> slots;  // tick -> (y index, r value)
    if (use_y) {
      for (std::size_t k = 0; k < s.obs_ticks.size(); ++k) slots[s.obs_ticks[k]].first = static_cast<int>(k) + 1;
    }
    if (use_r && s.has_events()) {
      const EventGrid eg = build_event_grid(s);
      for (std::size_t k = 0; k < eg.size(); ++k) slots[eg.tick_at(k)].second = eg.r[k] + 1;
    }
    SubjectLayout sl;
    sl.id = s.subject_id;
    for (const auto& [t, v] : slots) {
      sl.ticks.push_back(t);
      sl.has_y.push_back(v.first > 0);
      sl.y.push_back(v.first > 0 ? s.y[static_cast<std::size_t>(v.first - 1)] : 0.0);
      sl.has_r.push_back(v.second > 0);
      sl.r.push_back(v.second > 0 ? v.second - 1 : 0);
      sl.n_y += v.first > 0;
      sl.n_r += v.second > 0;
    }
    md.subjects.push_back(std::move(sl));
  }
  if (md.subjects.empty()) throw DataError("no subjects left to model after exclusions");

  std::vector<Tick> all;
  for (const auto& sl : md.subjects) all.insert(all.end(), sl.ticks.begin(), sl.ticks.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  md.grid = TimeGrid{std::move(all), 0.0};

  std::map<std::vector<Tick>, std::size_t> shape_index;
  for (auto& sl : md.subjects) {
    for (Tick t : sl.ticks) sl.global.push_back(md.grid.index_of(t));
    std::vector<Tick> rel(sl.ticks.size());
    for (std::size_t k = 0; k < rel.size(); ++k) rel[k] = sl.ticks[k] - sl.ticks.front();
    auto [it, fresh] = shape_index.try_emplace(rel, md.shapes.size());
    if (fresh) md.shapes.push_back(rel);
    sl.shape = it->second;
  }
  return md;
}

std::size_t ModelData::total_y() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.n_y;
  return n;
}

std::size_t ModelData::total_r() const {
  std::size_t n = 0;
  for (const auto& s : subjects) n += s.n_r;
  return n;
}

namespace {

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

bool same_vectors(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_vector(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

bool ModelState::operator==(const ModelState& o) const {
  return same_vector(mu_y, o.mu_y) && same_vector(mu_h, o.mu_h) && same_vectors(psi, o.psi) &&
         gamma == o.gamma && eta == o.eta && phi == o.phi && theta_psi == o.theta_psi &&
         theta_mu_y == o.theta_mu_y && theta_mu_h == o.theta_mu_h && sigma2_mu_y == o.sigma2_mu_y &&
         sigma2_mu_h == o.sigma2_mu_h && prior == o.prior && same_vectors(omega, o.omega);
}

bool DrawLayout::operator==(const DrawLayout& o) const {
  return mode == o.mode && global_ticks == o.global_ticks && subject_ids == o.subject_ids &&
         subject_ticks == o.subject_ticks && psi_kernel.to_text() == o.psi_kernel.to_text() &&
         mu_y_kernel.to_text() == o.mu_y_kernel.to_text() &&
         mu_h_kernel.to_text() == o.mu_h_kernel.to_text() && has_omega == o.has_omega;
}

std::size_t DrawLayout::subject_index(const std::string& id) const {
  auto it = std::find(subject_ids.begin(), subject_ids.end(), id);
  if (it == subject_ids.end()) throw DataError("subject '" + id + "' is not part of the fitted draws");
  return static_cast<std::size_t>(it - subject_ids.begin());
}

PosteriorDraws PosteriorDraws::chain(int c) const {
  PosteriorDraws out;
  out.layout = layout;
  out.config_echo = config_echo;
  for (const auto& m : chains) {
    if (m.chain == c) out.chains.push_back(m);
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (chain_of[k] == c) {
      out.states.push_back(states[k]);
      out.chain_of.push_back(c);
      out.iteration_of.push_back(iteration_of[k]);
    }
  }
  return out;
}

PosteriorDraws PosteriorDraws::merge(const std::vector<PosteriorDraws>& parts) {
  if (parts.empty()) return {};
  PosteriorDraws out;
  out.layout = parts.front().layout;
  out.config_echo = parts.front().config_echo;
  for (const auto& p : parts) {
    if (!(p.layout == out.layout)) throw DataError("cannot merge draws with different layouts");
    out.states.insert(out.states.end(), p.states.begin(), p.states.end());
    out.chain_of.insert(out.chain_of.end(), p.chain_of.begin(), p.chain_of.end());
    out.iteration_of.insert(out.iteration_of.end(), p.iteration_of.begin(), p.iteration_of.end());
    out.chains.insert(out.chains.end(), p.chains.begin(), p.chains.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// hyperparameter transforms

namespace {

enum class HyperKind { NegativeUnit, Positive };

void collect_kinds(const KernelSpec& k, std::vector<HyperKind>& out) {
  switch (k.family) {
    case KernelFamily::SquaredExponential: out.push_back(HyperKind::Positive); break;
    case KernelFamily::AR1: out.push_back(HyperKind::NegativeUnit); break;
    case KernelFamily::BrownianMotion: break;
    case KernelFamily::Sum:
      collect_kinds(k.parts[0], out);
      collect_kinds(k.parts[1], out);
      break;
  }
}

std::vector<HyperKind> hyper_kinds(const KernelSpec& k) {
  std::vector<HyperKind> out;
  collect_kinds(k, out);
  return out;
}

// rho = -sigmoid(u); length-scale = exp(u)
double to_unconstrained(HyperKind kind, double v) {
  if (kind == HyperKind::Positive) return std::log(v);
  const double p = -v;
  return std::log(p) - std::log1p(-p);
}

double from_unconstrained(HyperKind kind, double u) {
  if (kind == HyperKind::Positive) return std::exp(u);
  return -logit_inv(u);
}

double log_jacobian(HyperKind kind, double v) {
  if (kind == HyperKind::Positive) return std::log(v);
  return std::log(-v) + std::log1p(v);
}

constexpr double kLog2Pi = 1.8378770664093454836;

double floor_at(double v, double floor) { return std::max(v, floor); }

}  // namespace

// ---------------------------------------------------------------------------
// sampler

GibbsSampler::GibbsSampler(ModelData data, SamplerConfig cfg) : data_(std::move(data)), cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto& ticks = data_.grid.ticks;
  const double span = static_cast<double>(ticks.back() - ticks.front());
  default_mean_kernel_ = KernelSpec::squared_exponential(std::max(span / 4.0, 1.0), 1e-6);
  g_phi_default_ = cfg_.g_phi > 0.0 ? cfg_.g_phi : std::max<double>(1.0, static_cast<double>(data_.total_r()));
  for (const char* name : {"theta_psi", "theta_mu_y", "theta_mu_h"}) step_[name] = cfg_.initial_step;
}

DrawLayout GibbsSampler::layout() const {
  DrawLayout l;
  l.mode = cfg_.mode;
  l.global_ticks = data_.grid.ticks;
  for (const auto& s : data_.subjects) {
    l.subject_ids.push_back(s.id);
    l.subject_ticks.push_back(s.ticks);
  }
  l.psi_kernel = cfg_.psi_kernel;
  l.mu_y_kernel = cfg_.mu_y_kernel.value_or(default_mean_kernel_);
  l.mu_h_kernel = cfg_.mu_h_kernel.value_or(default_mean_kernel_);
  l.has_omega = cfg_.keep_omega && cfg_.mode != ModelMode::LongitudinalOnly;
  return l;
}

KernelSpec GibbsSampler::psi_kernel(const std::vector<double>& theta) const {
  KernelSpec k = cfg_.psi_kernel;
  k.set_all_hyper(theta);
  k.anchor = 0;  // shapes start at 0
  return k;
}

KernelSpec GibbsSampler::mu_y_kernel(const ModelState& s) const {
  KernelSpec k = cfg_.mu_y_kernel.value_or(default_mean_kernel_);
  if (!s.theta_mu_y.empty()) k.set_all_hyper(s.theta_mu_y);
  return k;
}

KernelSpec GibbsSampler::mu_h_kernel(const ModelState& s) const {
  KernelSpec k = cfg_.mu_h_kernel.value_or(default_mean_kernel_);
  if (!s.theta_mu_h.empty()) k.set_all_hyper(s.theta_mu_h);
  return k;
}

ModelState GibbsSampler::init_state() const {
  const auto n_t = static_cast<Eigen::Index>(data_.grid.size());
  const std::size_t n = data_.subjects.size();
  const double floor = cfg_.variance_floor;
  const bool use_y = cfg_.mode != ModelMode::SurvivalOnly;
  const bool use_r = cfg_.mode != ModelMode::LongitudinalOnly;

  ModelState s;
  s.psi.resize(n);
  s.gamma.assign(n, 0.0);
  s.eta.assign(n, 0.0);
  s.omega.resize(n);
  s.prior.sigma2_psi.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.psi[i] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.subjects[i].size()));
    s.omega[i] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.subjects[i].size()));
  }
  s.theta_psi = cfg_.psi_kernel.all_hyper();

  if (use_y) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_t), cnt = Eigen::VectorXd::Zero(n_t);
    for (const auto& sl : data_.subjects) {
      for (std::size_t k = 0; k < sl.size(); ++k) {
        if (!sl.has_y[k]) continue;
        sum(static_cast<Eigen::Index>(sl.global[k])) += sl.y[k];
        cnt(static_cast<Eigen::Index>(sl.global[k])) += 1.0;
      }
    }
    s.mu_y = Eigen::VectorXd::Zero(n_t);
    for (Eigen::Index t = 0; t < n_t; ++t) {
      if (cnt(t) > 0) s.mu_y(t) = sum(t) / cnt(t);
    }
    double pooled = 0.0;
    double gamma_ss = 0.0;
    std::size_t pooled_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& sl = data_.subjects[i];
      double dev = 0.0;
      for (std::size_t k = 0; k < sl.size(); ++k) {
        if (sl.has_y[k]) dev += sl.y[k] - s.mu_y(static_cast<Eigen::Index>(sl.global[k]));
      }
      s.gamma[i] = dev / static_cast<double>(sl.n_y);
      double ss = 0.0;
      for (std::size_t k = 0; k < sl.size(); ++k) {
        if (!sl.has_y[k]) continue;
        const double r = sl.y[k] - s.mu_y(static_cast<Eigen::Index>(sl.global[k])) - s.gamma[i];
        s.psi[i](static_cast<Eigen::Index>(k)) = r;
        ss += r * r;
      }
      s.prior.sigma2_psi[i] = floor_at(ss / static_cast<double>(sl.n_y), floor);
      pooled += ss;
      pooled_n += sl.n_y;
      gamma_ss += static_cast<double>(sl.n_y) * s.gamma[i] * s.gamma[i];
    }
    s.prior.sigma2_y = floor_at(0.1 * pooled / static_cast<double>(pooled_n), floor);
    s.sigma2_mu_y = floor_at(s.mu_y.squaredNorm() / static_cast<double>(n_t), floor);
    s.prior.g_gamma = floor_at(gamma_ss / (static_cast<double>(n) * s.prior.sigma2_y), floor);
    s.theta_mu_y = mu_y_kernel(s).all_hyper();
  } else {
    s.prior.sigma2_y = 1.0;
    s.prior.sigma2_psi.assign(n, 0.1);
  }

  if (use_r) {
    s.mu_h = Eigen::VectorXd::Zero(n_t);
    s.sigma2_mu_h = 1.0;
    s.prior.g_eta = 1.0;
    s.phi = cfg_.mode == ModelMode::SurvivalOnly ? 1.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& sl = data_.subjects[i];
      for (std::size_t k = 0; k < sl.size(); ++k) {
        if (sl.has_r[k]) s.omega[i](static_cast<Eigen::Index>(k)) = 0.25;
      }
    }
    s.theta_mu_h = mu_h_kernel(s).all_hyper();
  }

  // overrides only touch parameters the mode carries
  if (use_y) {
    if (!std::isnan(cfg_.init_sigma2_y)) s.prior.sigma2_y = cfg_.init_sigma2_y;
    if (!std::isnan(cfg_.init_g_gamma)) s.prior.g_gamma = cfg_.init_g_gamma;
    if (!std::isnan(cfg_.init_sigma2_mu_y)) s.sigma2_mu_y = cfg_.init_sigma2_mu_y;
  }
  if (use_r) {
    if (!std::isnan(cfg_.init_g_eta)) s.prior.g_eta = cfg_.init_g_eta;
    if (!std::isnan(cfg_.init_sigma2_mu_h)) s.sigma2_mu_h = cfg_.init_sigma2_mu_h;
  }
  if (!std::isnan(cfg_.init_sigma2_psi)) s.prior.sigma2_psi.assign(n, cfg_.init_sigma2_psi);
  if (!std::isnan(cfg_.init_phi) && cfg_.mode == ModelMode::Joint) s.phi = cfg_.init_phi;

  s.prior.nu = s.prior.sigma2_psi;
  double mean_s2 = 0.0;
  for (double v : s.prior.sigma2_psi) mean_s2 += v;
  s.prior.tau2 = floor_at(mean_s2 / static_cast<double>(n), floor);
  s.prior.xi = 1.0;
  if (cfg_.mode == ModelMode::Joint) {
    s.prior.g_phi = g_phi_default_;
    s.prior.mu_phi = cfg_.mu_phi;
  }
  return s;
}

const std::vector<GibbsSampler::ShapeFactor>& GibbsSampler::shape_factors(const std::vector<double>& theta) const {
  if (!cached_factors_.empty() && cached_theta_ == theta) return cached_factors_;
  const KernelSpec k = psi_kernel(theta);
  std::vector<ShapeFactor> out;
  out.reserve(data_.shapes.size());
  for (const auto& shape : data_.shapes) {
    ShapeFactor f;
    f.v = realize(k, shape);
    double extra = 0.0;
    f.l = robust_cholesky(f.v, &extra);
    f.v.diagonal().array() += extra;
    f.log_det = 2.0 * f.l.diagonal().array().log().sum();
    out.push_back(std::move(f));
  }
  cached_factors_ = std::move(out);
  cached_theta_ = theta;
  return cached_factors_;
}

Eigen::VectorXd GibbsSampler::logit_hazard(const ModelState& s, std::size_t i) const {
  const auto& sl = data_.subjects[i];
  Eigen::VectorXd h(static_cast<Eigen::Index>(sl.size()));
  for (std::size_t k = 0; k < sl.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    h(kk) = s.eta[i] + s.mu_h(static_cast<Eigen::Index>(sl.global[k])) + s.phi * s.psi[i](kk);
  }
  return h;
}

void GibbsSampler::update_omega(ModelState& s, Rng& rng) const {
  for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
    const auto& sl = data_.subjects[i];
    const Eigen::VectorXd h = logit_hazard(s, i);
    for (std::size_t k = 0; k < sl.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      s.omega[i](kk) = sl.has_r[k] ? pg_sample(h(kk), rng) : 0.0;
    }
  }
}

void GibbsSampler::mean_pseudo_obs(const ModelState& s, bool y_channel, Eigen::VectorXd& prec,
                                   Eigen::VectorXd& lin) const {
  const auto n_t = static_cast<Eigen::Index>(data_.grid.size());
  prec = Eigen::VectorXd::Zero(n_t);
  lin = Eigen::VectorXd::Zero(n_t);
  for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
    const auto& sl = data_.subjects[i];
    for (std::size_t k = 0; k < sl.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const auto g = static_cast<Eigen::Index>(sl.global[k]);
      if (y_channel) {
        if (!sl.has_y[k]) continue;
        prec(g) += 1.0 / s.prior.sigma2_y;
        lin(g) += (sl.y[k] - s.gamma[i] - s.psi[i](kk)) / s.prior.sigma2_y;
      } else {
        if (!sl.has_r[k]) continue;
        const double w = s.omega[i](kk);
        prec(g) += w;
        lin(g) += (sl.r[k] - 0.5) - w * (s.eta[i] + s.phi * s.psi[i](kk));
      }
    }
  }
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> GibbsSampler::mu_y_conditional(const ModelState& s) const {
  Eigen::VectorXd prec, lin;
  mean_pseudo_obs(s, true, prec, lin);
  const Eigen::MatrixXd k = s.sigma2_mu_y * realize(mu_y_kernel(s), data_.grid.ticks);
  auto c = gaussian_conditional(k, prec, lin);
  return {std::move(c.mean), std::move(c.cov)};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> GibbsSampler::mu_h_conditional(const ModelState& s) const {
  Eigen::VectorXd prec, lin;
  mean_pseudo_obs(s, false, prec, lin);
  const Eigen::MatrixXd k = s.sigma2_mu_h * realize(mu_h_kernel(s), data_.grid.ticks);
  auto c = gaussian_conditional(k, prec, lin);
  return {std::move(c.mean), std::move(c.cov)};
}

void GibbsSampler::update_mu_y(ModelState& s, Rng& rng) const {
  Eigen::VectorXd prec, lin;
  mean_pseudo_obs(s, true, prec, lin);
  const Eigen::MatrixXd k = s.sigma2_mu_y * realize(mu_y_kernel(s), data_.grid.ticks);
  s.mu_y = sample_gaussian_conditional(k, prec, lin, rng);
}

void GibbsSampler::update_mu_h(ModelState& s, Rng& rng) const {
  Eigen::VectorXd prec, lin;
  mean_pseudo_obs(s, false, prec, lin);
  const Eigen::MatrixXd k = s.sigma2_mu_h * realize(mu_h_kernel(s), data_.grid.ticks);
  s.mu_h = sample_gaussian_conditional(k, prec, lin, rng);
}

double GibbsSampler::phi_g() const { return g_phi_default_; }

double GibbsSampler::phi_prior_quadratic(const ModelState& s) const {
  if (cfg_.mode != ModelMode::Joint) return 0.0;
  const double d = s.phi - s.prior.mu_phi;
  return d * d / s.prior.g_phi;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> GibbsSampler::psi_conditional(const ModelState& s, std::size_t i) const {
  const auto& sl = data_.subjects[i];
  const auto& f = shape_factors(s.theta_psi)[sl.shape];
  const auto n = static_cast<Eigen::Index>(sl.size());
  const bool use_y = cfg_.mode != ModelMode::SurvivalOnly;
  const bool use_r = cfg_.mode != ModelMode::LongitudinalOnly;
  const double c = phi_prior_quadratic(s);
  Eigen::VectorXd prec = Eigen::VectorXd::Constant(n, c);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < sl.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const auto g = static_cast<Eigen::Index>(sl.global[k]);
    if (use_y && sl.has_y[k]) {
      prec(kk) += 1.0 / s.prior.sigma2_y;
      lin(kk) += (sl.y[k] - s.gamma[i] - s.mu_y(g)) / s.prior.sigma2_y;
    }
    if (use_r && sl.has_r[k]) {
      const double w = s.omega[i](kk);
      prec(kk) += s.phi * s.phi * w;
      lin(kk) += s.phi * ((sl.r[k] - 0.5) - w * (s.eta[i] + s.mu_h(g)));
    }
  }
  auto cond = gaussian_conditional(s.prior.sigma2_psi[i] * f.v, prec, lin);
  return {std::move(cond.mean), std::move(cond.cov)};
}

void GibbsSampler::update_psi(ModelState& s, std::size_t i, Rng& rng) {
  auto [mean, cov] = psi_conditional(s, i);
  const Eigen::MatrixXd l = robust_cholesky(cov);
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
  Eigen::VectorXd proposal = mean + l.triangularView<Eigen::Lower>() * z;
  if (cfg_.mode != ModelMode::Joint) {
    s.psi[i] = std::move(proposal);
    return;
  }
  // The phi g-prior carries a factor sqrt(sum_j psi_j'psi_j) that is not
  // Gaussian in psi; correct for it with an independence Metropolis step.
  double total = 0.0;
  for (const auto& p : s.psi) total += p.squaredNorm();
  const double proposed_total = total - s.psi[i].squaredNorm() + proposal.squaredNorm();
  const double log_ratio = 0.5 * (std::log(proposed_total) - std::log(total));
  const bool accept = log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio;
  if (accept) s.psi[i] = std::move(proposal);
  record("psi_phi_prior", accept);
}

void GibbsSampler::update_intercepts(ModelState& s, Rng& rng) const {
  const bool use_y = cfg_.mode != ModelMode::SurvivalOnly;
  const bool use_r = cfg_.mode != ModelMode::LongitudinalOnly;
  for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
    const auto& sl = data_.subjects[i];
    if (use_y && sl.n_y > 0) {
      double resid = 0.0;
      for (std::size_t k = 0; k < sl.size(); ++k) {
        if (sl.has_y[k]) {
          resid += sl.y[k] - s.mu_y(static_cast<Eigen::Index>(sl.global[k])) - s.psi[i](static_cast<Eigen::Index>(k));
        }
      }
      const double ny = static_cast<double>(sl.n_y);
      const double prec = ny / s.prior.sigma2_y * (1.0 + 1.0 / s.prior.g_gamma);
      const double mean = resid / s.prior.sigma2_y / prec;
      s.gamma[i] = rng.normal(mean, std::sqrt(1.0 / prec));
    }
    if (use_r && sl.n_r > 0) {
      double prec = static_cast<double>(sl.n_r) / s.prior.g_eta;
      double lin = 0.0;
      for (std::size_t k = 0; k < sl.size(); ++k) {
        if (!sl.has_r[k]) continue;
        const auto kk = static_cast<Eigen::Index>(k);
        const double w = s.omega[i](kk);
        prec += w;
        lin += (sl.r[k] - 0.5) - w * (s.mu_h(static_cast<Eigen::Index>(sl.global[k])) + s.phi * s.psi[i](kk));
      }
      s.eta[i] = rng.normal(lin / prec, std::sqrt(1.0 / prec));
    }
  }
}

void GibbsSampler::update_phi(ModelState& s, Rng& rng) const {
  double total = 0.0;
  for (const auto& p : s.psi) total += p.squaredNorm();
  double prec = total / s.prior.g_phi;
  double lin = total * s.prior.mu_phi / s.prior.g_phi;
  for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
    const auto& sl = data_.subjects[i];
    for (std::size_t k = 0; k < sl.size(); ++k) {
      if (!sl.has_r[k]) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      const double w = s.omega[i](kk);
      const double p = s.psi[i](kk);
      prec += w * p * p;
      lin += p * ((sl.r[k] - 0.5) - w * (s.eta[i] + s.mu_h(static_cast<Eigen::Index>(sl.global[k]))));
    }
  }
  if (!(prec > 0.0)) throw NumericalError("phi conditional has zero precision");
  s.phi = rng.normal(lin / prec, std::sqrt(1.0 / prec));
}

void GibbsSampler::update_sigma2_y(ModelState& s, Rng& rng) const {
  double ssr = 0.0;
  double gamma_q = 0.0;
  double shape = 0.5;  // from tau's half-Cauchy scale sigma_y
  for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
    const auto& sl = data_.subjects[i];
    for (std::size_t k = 0; k < sl.size(); ++k) {
      if (!sl.has_y[k]) continue;
      const double e = sl.y[k] - s.gamma[i] - s.mu_y(static_cast<Eigen::Index>(sl.global[k])) -
                       s.psi[i](static_cast<Eigen::Index>(k));
      ssr += e * e;
    }
    shape += 0.5 * static_cast<double>(sl.n_y) + 0.5;
    gamma_q += static_cast<double>(sl.n_y) * s.gamma[i] * s.gamma[i];
  }
  const double rate = 0.5 * ssr + 0.5 * gamma_q / s.prior.g_gamma + 1.0 / s.prior.xi;
  s.prior.sigma2_y = floor_at(rng.inv_gamma(shape, rate), cfg_.variance_floor);
}

void GibbsSampler::update_scales(ModelState& s, Rng& rng) {
  const auto& factors = shape_factors(s.theta_psi);
  const double floor = cfg_.variance_floor;
  const std::size_t n = data_.subjects.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sl = data_.subjects[i];
    const auto& f = factors[sl.shape];
    const double q = f.l.triangularView<Eigen::Lower>().solve(s.psi[i]).squaredNorm();
    s.prior.sigma2_psi[i] =
        floor_at(rng.inv_gamma(0.5 * static_cast<double>(sl.size()) + 0.5, 0.5 * q + 1.0 / s.prior.nu[i]), floor);
    s.prior.nu[i] = floor_at(rng.inv_gamma(1.0, 1.0 / s.prior.sigma2_psi[i] + 1.0 / s.prior.tau2), floor);
  }
  double inv_nu = 0.0;
  for (double v : s.prior.nu) inv_nu += 1.0 / v;
  s.prior.tau2 = floor_at(rng.inv_gamma(0.5 * static_cast<double>(n) + 0.5, inv_nu + 1.0 / s.prior.xi), floor);
  const double top = cfg_.mode == ModelMode::SurvivalOnly ? 1.0 : s.prior.sigma2_y;
  s.prior.xi = floor_at(rng.inv_gamma(1.0, 1.0 / s.prior.tau2 + 1.0 / top), floor);
}

void GibbsSampler::update_mean_variances(ModelState& s, Rng& rng) const {
  const double n_t = static_cast<double>(data_.grid.size());
  if (cfg_.mode != ModelMode::SurvivalOnly) {
    const CovMatrix v(realize(mu_y_kernel(s), data_.grid.ticks));
    const double q = v.cholesky().triangularView<Eigen::Lower>().solve(s.mu_y).squaredNorm();
    s.sigma2_mu_y = floor_at(rng.inv_gamma(0.5 * n_t, 0.5 * q), cfg_.variance_floor);
  }
  if (cfg_.mode != ModelMode::LongitudinalOnly) {
    const CovMatrix v(realize(mu_h_kernel(s), data_.grid.ticks));
    const double q = v.cholesky().triangularView<Eigen::Lower>().solve(s.mu_h).squaredNorm();
    s.sigma2_mu_h = floor_at(rng.inv_gamma(0.5 * n_t, 0.5 * q), cfg_.variance_floor);
  }
}

double GibbsSampler::psi_loglik(const ModelState& s, const std::vector<double>& theta) const {
  const auto& factors = shape_factors(theta);
  double ll = 0.0;
  for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
    const auto& f = factors[data_.subjects[i].shape];
    const double n = static_cast<double>(s.psi[i].size());
    const double s2 = s.prior.sigma2_psi[i];
    const double q = f.l.triangularView<Eigen::Lower>().solve(s.psi[i]).squaredNorm();
    ll += -0.5 * (n * (kLog2Pi + std::log(s2)) + f.log_det + q / s2);
  }
  return ll;
}

double GibbsSampler::psi_hyper_logprior(const std::vector<double>& theta) const {
  if (cfg_.psi_hyper_prior == PsiHyperPrior::Uniform) return 0.0;
  const KernelSpec k = psi_kernel(theta);
  std::vector<std::size_t> counts(data_.shapes.size(), 0);
  for (const auto& sl : data_.subjects) ++counts[sl.shape];
  double lp = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double total = 0.0;
    for (std::size_t sh = 0; sh < data_.shapes.size(); ++sh) {
      total += static_cast<double>(counts[sh]) * whitening_trace_terms(k, data_.shapes[sh], j).tr_u2;
    }
    if (!(total > 0.0)) return -std::numeric_limits<double>::infinity();
    lp += 0.5 * std::log(total);
  }
  return lp;
}

double GibbsSampler::mean_hyper_logtarget(const ModelState& s, bool y_channel, double length_scale) const {
  Eigen::VectorXd prec, lin;
  mean_pseudo_obs(s, y_channel, prec, lin);
  KernelSpec k = y_channel ? mu_y_kernel(s) : mu_h_kernel(s);
  k.set_all_hyper({length_scale});
  const double s2 = y_channel ? s.sigma2_mu_y : s.sigma2_mu_h;

  std::vector<Eigen::Index> obs;
  for (Eigen::Index t = 0; t < prec.size(); ++t) {
    if (prec(t) > 0.0) obs.push_back(t);
  }
  const auto m = static_cast<Eigen::Index>(obs.size());
  const Eigen::MatrixXd full = realize(k, data_.grid.ticks);
  Eigen::MatrixXd c(m, m);
  Eigen::VectorXd z(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    z(a) = lin(obs[a]) / prec(obs[a]);
    for (Eigen::Index b = 0; b < m; ++b) c(a, b) = s2 * full(obs[a], obs[b]);
    c(a, a) += 1.0 / prec(obs[a]);
  }
  GaussianDist marginal{Eigen::VectorXd::Zero(m), CovMatrix(std::move(c))};
  const double ll = mvn_logpdf(z, marginal);
  const double lp = jeffreys_gp_logprior(k, data_.grid.ticks, 1.0);
  return ll + lp + std::log(length_scale);
}

void GibbsSampler::record(const std::string& block, bool accepted) {
  auto& a = accept_[block];
  ++a.proposed;
  a.accepted += accepted;
  auto& b = batch_[block];
  ++b.proposed;
  b.accepted += accepted;
}

void GibbsSampler::update_kernel_hyper(ModelState& s, Rng& rng) {
  if (cfg_.sample_psi_hyper && !s.theta_psi.empty()) {
    const auto kinds = hyper_kinds(cfg_.psi_kernel);
    for (std::size_t j = 0; j < s.theta_psi.size(); ++j) {
      const double cur = s.theta_psi[j];
      const double u = to_unconstrained(kinds[j], cur);
      std::vector<double> prop = s.theta_psi;
      prop[j] = from_unconstrained(kinds[j], u + step_["theta_psi"] * rng.normal());
      bool accept = false;
      const bool in_domain = kinds[j] == HyperKind::Positive ? prop[j] > 0.0 : (prop[j] > -1.0 && prop[j] < 0.0);
      if (in_domain) {
        const double cur_lp = psi_loglik(s, s.theta_psi) + psi_hyper_logprior(s.theta_psi) + log_jacobian(kinds[j], cur);
        const double new_lp = psi_loglik(s, prop) + psi_hyper_logprior(prop) + log_jacobian(kinds[j], prop[j]);
        const double log_ratio = new_lp - cur_lp;
        accept = std::isfinite(new_lp) && (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio);
      }
      if (accept) s.theta_psi = prop;
      record("theta_psi", accept);
    }
  }
  if (!cfg_.sample_mean_hyper) return;
  auto mean_step = [&](bool y_channel) {
    auto& theta = y_channel ? s.theta_mu_y : s.theta_mu_h;
    if (theta.size() != 1) return;  // only single-length-scale kernels are updated
    const char* name = y_channel ? "theta_mu_y" : "theta_mu_h";
    const double cur = theta[0];
    const double prop = std::exp(std::log(cur) + step_[name] * rng.normal());
    const double log_ratio = mean_hyper_logtarget(s, y_channel, prop) - mean_hyper_logtarget(s, y_channel, cur);
    const bool accept = std::isfinite(log_ratio) && (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio);
    if (accept) {
      theta[0] = prop;
      // (length-scale, mean process) move as one block: redraw the process
      if (y_channel) {
        update_mu_y(s, rng);
      } else {
        update_mu_h(s, rng);
      }
    }
    record(name, accept);
  };
  if (cfg_.mode != ModelMode::SurvivalOnly) mean_step(true);
  if (cfg_.mode != ModelMode::LongitudinalOnly) mean_step(false);
}

void GibbsSampler::update_g(ModelState& s, Rng& rng) const {
  const double floor = cfg_.variance_floor;
  if (cfg_.sample_g) {
    if (cfg_.mode != ModelMode::SurvivalOnly) {
      double q = 0.0, cnt = 0.0;
      for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
        const double ny = static_cast<double>(data_.subjects[i].n_y);
        if (ny == 0.0) continue;
        q += ny * s.gamma[i] * s.gamma[i];
        cnt += 1.0;
      }
      s.prior.g_gamma = floor_at(rng.inv_gamma(0.5 * cnt, 0.5 * q / s.prior.sigma2_y), floor);
    }
    if (cfg_.mode != ModelMode::LongitudinalOnly) {
      double q = 0.0, cnt = 0.0;
      for (std::size_t i = 0; i < data_.subjects.size(); ++i) {
        const double nr = static_cast<double>(data_.subjects[i].n_r);
        if (nr == 0.0) continue;
        q += nr * s.eta[i] * s.eta[i];
        cnt += 1.0;
      }
      s.prior.g_eta = floor_at(rng.inv_gamma(0.5 * cnt, 0.5 * q), floor);
    }
  }
  if (cfg_.sample_phi_hyper && cfg_.mode == ModelMode::Joint) {
    double total = 0.0;
    for (const auto& p : s.psi) total += p.squaredNorm();
    s.prior.mu_phi = rng.normal(s.phi, std::sqrt(s.prior.g_phi / total));
    const double d = s.phi - s.prior.mu_phi;
    s.prior.g_phi = floor_at(rng.inv_gamma(0.5, 0.5 * total * d * d), floor);
  }
}

void GibbsSampler::sweep(ModelState& s, Rng& rng) {
  const bool use_y = cfg_.mode != ModelMode::SurvivalOnly;
  const bool use_r = cfg_.mode != ModelMode::LongitudinalOnly;
  auto block = [&](const char* name, auto&& fn) {
    try {
      fn();
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("block '") + name + "': " + e.what());
    } catch (const DomainError& e) {
      throw NumericalError(std::string("block '") + name + "': " + e.what());
    }
  };
  if (use_r) block("omega", [&] { update_omega(s, rng); });
  if (use_y) block("mu_y", [&] { update_mu_y(s, rng); });
  if (use_r) block("mu_h", [&] { update_mu_h(s, rng); });
  block("psi", [&] {
    for (std::size_t i = 0; i < data_.subjects.size(); ++i) update_psi(s, i, rng);
  });
  block("intercepts", [&] { update_intercepts(s, rng); });
  if (cfg_.mode == ModelMode::Joint) block("phi", [&] { update_phi(s, rng); });
  if (use_y && cfg_.sample_sigma2_y) block("sigma2_y", [&] { update_sigma2_y(s, rng); });
  if (cfg_.sample_sigma2_psi) block("sigma2_psi", [&] { update_scales(s, rng); });
  if (cfg_.sample_mean_variances) block("sigma2_mu", [&] { update_mean_variances(s, rng); });
  block("kernel_hyper", [&] { update_kernel_hyper(s, rng); });
  block("g", [&] { update_g(s, rng); });
}

void GibbsSampler::end_adaptation_batch() {
  if (!adapting_) return;
  for (auto& [name, b] : batch_) {
    if (b.proposed == 0 || !step_.count(name)) continue;
    const double rate = b.rate();
    step_[name] = std::clamp(step_[name] * std::exp(2.0 * (rate - cfg_.target_accept)), 1e-4, 10.0);
  }
  batch_.clear();
}

void GibbsSampler::reset_acceptance() {
  accept_.clear();
  batch_.clear();
}

// ---------------------------------------------------------------------------
// chains

PosteriorDraws run_chain(const std::vector<SubjectSeries>& data, const SamplerConfig& cfg, std::uint64_t seed,
                         int chain) {
  GibbsSampler sampler(ModelData::build(data, cfg.mode), cfg);
  Rng rng(chain == 0 ? seed : seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(chain)));
  ModelState state = sampler.init_state();

  PosteriorDraws out;
  out.layout = sampler.layout();
  out.config_echo = cfg.echo();
  sampler.set_adapting(cfg.burn_in > 0);
  for (int it = 1; it <= cfg.iterations; ++it) {
    try {
      sampler.sweep(state, rng);
    } catch (const NumericalError& e) {
      throw NumericalError("iteration " + std::to_string(it) + ": " + e.what());
    }
    if (it <= cfg.burn_in) {
      if (it % cfg.adapt_interval == 0) sampler.end_adaptation_batch();
      if (it == cfg.burn_in) {
        sampler.set_adapting(false);
        sampler.reset_acceptance();
      }
      continue;
    }
    if ((it - cfg.burn_in) % cfg.thin == 0) {
      ModelState snap = state;
      if (!out.layout.has_omega) snap.omega.clear();
      out.states.push_back(std::move(snap));
      out.chain_of.push_back(chain);
      out.iteration_of.push_back(it);
    }
  }
  ChainMeta meta;
  meta.seed = seed;
  meta.chain = chain;
  meta.iterations = cfg.iterations;
  meta.burn_in = cfg.burn_in;
  meta.thin = cfg.thin;
  for (const auto& [name, a] : sampler.acceptance()) meta.acceptance[name] = a.rate();
  meta.step_size = sampler.step_sizes();
  out.chains.push_back(meta);
  return out;
}

PosteriorDraws run_chains(const std::vector<SubjectSeries>& data, const SamplerConfig& cfg, std::uint64_t seed,
                          int chains) {
  if (chains < 1) throw UsageError("mcmc.chains must be >= 1");
  if (chains == 1) return run_chain(data, cfg, seed, 0);
  std::vector<PosteriorDraws> parts(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  std::vector<std::thread> workers;
  for (int c = 0; c < chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        parts[static_cast<std::size_t>(c)] = run_chain(data, cfg, seed, c);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return PosteriorDraws::merge(parts);
}

// ---------------------------------------------------------------------------
// flattening

namespace {

std::string theta_name(const std::string& base, std::size_t j, std::size_t n) {
  return n == 1 ? base : base + "[" + std::to_string(j) + "]";
}

// Visits every persisted scalar of a state in column order; `fn(name, value&)`.
template <typename State, typename Fn>
void visit_columns(State& s, const DrawLayout& l, Fn&& fn) {
  const bool y = l.mode != ModelMode::SurvivalOnly;
  const bool r = l.mode != ModelMode::LongitudinalOnly;
  const bool joint = l.mode == ModelMode::Joint;
  const std::size_t n = l.subject_ids.size();
  auto subj = [&](const std::string& base, std::size_t i) { return base + "[" + l.subject_ids[i] + "]"; };
  auto tick = [&](const std::string& base, std::size_t t) { return base + "[" + std::to_string(l.global_ticks[t]) + "]"; };
  auto slot = [&](const std::string& base, std::size_t i, std::size_t k) {
    return base + "[" + l.subject_ids[i] + "][" + std::to_string(l.subject_ticks[i][k]) + "]";
  };
  // lexicographic by parameter name
  if (r) for (std::size_t i = 0; i < n; ++i) fn(subj("eta", i), s.eta[i]);
  if (r) fn(std::string("g_eta"), s.prior.g_eta);
  if (y) fn(std::string("g_gamma"), s.prior.g_gamma);
  if (joint) fn(std::string("g_phi"), s.prior.g_phi);
  if (y) for (std::size_t i = 0; i < n; ++i) fn(subj("gamma", i), s.gamma[i]);
  if (r) for (std::size_t t = 0; t < l.global_ticks.size(); ++t) fn(tick("mu_h", t), s.mu_h(static_cast<Eigen::Index>(t)));
  if (joint) fn(std::string("mu_phi"), s.prior.mu_phi);
  if (y) for (std::size_t t = 0; t < l.global_ticks.size(); ++t) fn(tick("mu_y", t), s.mu_y(static_cast<Eigen::Index>(t)));
  for (std::size_t i = 0; i < n; ++i) fn(subj("nu", i), s.prior.nu[i]);
  if (l.has_omega) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < l.subject_ticks[i].size(); ++k) fn(slot("omega", i, k), s.omega[i](static_cast<Eigen::Index>(k)));
  }
  if (joint) fn(std::string("phi"), s.phi);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < l.subject_ticks[i].size(); ++k) fn(slot("psi", i, k), s.psi[i](static_cast<Eigen::Index>(k)));
  if (r) fn(std::string("sigma2_mu_h"), s.sigma2_mu_h);
  if (y) fn(std::string("sigma2_mu_y"), s.sigma2_mu_y);
  for (std::size_t i = 0; i < n; ++i) fn(subj("sigma2_psi", i), s.prior.sigma2_psi[i]);
  if (y) fn(std::string("sigma2_y"), s.prior.sigma2_y);
  fn(std::string("tau2"), s.prior.tau2);
  if (r) for (std::size_t j = 0; j < s.theta_mu_h.size(); ++j) fn(theta_name("theta_mu_h", j, s.theta_mu_h.size()), s.theta_mu_h[j]);
  if (y) for (std::size_t j = 0; j < s.theta_mu_y.size(); ++j) fn(theta_name("theta_mu_y", j, s.theta_mu_y.size()), s.theta_mu_y[j]);
  for (std::size_t j = 0; j < s.theta_psi.size(); ++j) fn(theta_name("theta_psi", j, s.theta_psi.size()), s.theta_psi[j]);
  fn(std::string("xi"), s.prior.xi);
}

ModelState shaped_state(const DrawLayout& l) {
  ModelState s;
  const std::size_t n = l.subject_ids.size();
  const auto n_t = static_cast<Eigen::Index>(l.global_ticks.size());
  if (l.mode != ModelMode::SurvivalOnly) s.mu_y = Eigen::VectorXd::Zero(n_t);
  if (l.mode != ModelMode::LongitudinalOnly) s.mu_h = Eigen::VectorXd::Zero(n_t);
  s.gamma.assign(n, 0.0);
  s.eta.assign(n, 0.0);
  s.prior.sigma2_psi.assign(n, 0.0);
  s.prior.nu.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.psi.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l.subject_ticks[i].size())));
    if (l.has_omega) s.omega.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l.subject_ticks[i].size())));
  }
  s.theta_psi.assign(l.psi_kernel.hyper_count(), 0.0);
  if (l.mode != ModelMode::SurvivalOnly) s.theta_mu_y.assign(l.mu_y_kernel.hyper_count(), 0.0);
  if (l.mode != ModelMode::LongitudinalOnly) s.theta_mu_h.assign(l.mu_h_kernel.hyper_count(), 0.0);
  if (l.mode == ModelMode::SurvivalOnly) s.phi = 1.0;
  return s;
}

}  // namespace

std::vector<std::pair<std::string, double>> flatten_state(const ModelState& s, const DrawLayout& layout) {
  std::vector<std::pair<std::string, double>> out;
  visit_columns(s, layout, [&](const std::string& name, const double& v) { out.emplace_back(name, v); });
  return out;
}

std::vector<std::string> state_column_names(const DrawLayout& layout) {
  ModelState s = shaped_state(layout);
  std::vector<std::string> out;
  visit_columns(s, layout, [&](const std::string& name, double&) { out.push_back(name); });
  return out;
}

ModelState unflatten_state(const std::vector<double>& values, const DrawLayout& layout) {
  ModelState s = shaped_state(layout);
  std::size_t k = 0;
  visit_columns(s, layout, [&](const std::string&, double& v) {
    if (k >= values.size()) throw DataError("draw row has too few columns");
    v = values[k++];
  });
  if (k != values.size()) throw DataError("draw row has too many columns");
  return s;
}

// ---------------------------------------------------------------------------
// summaries

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw DomainError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<SummaryRow> summarize_columns(const std::vector<std::string>& names,
                                          const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw DomainError("summarize: names and columns differ in length");
  std::vector<SummaryRow> out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto& v = columns[c];
    if (v.empty()) throw DomainError("summarize: no draws");
    SummaryRow row;
    row.name = names[c];
    row.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - row.mean) * (x - row.mean);
    row.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    row.q025 = quantile(v, 0.025);
    row.q975 = quantile(v, 0.975);
    out.push_back(row);
  }
  return out;
}

std::vector<SummaryRow> summarize(const PosteriorDraws& draws) {
  if (draws.states.empty()) throw DomainError("summarize: no draws");
  const auto& l = draws.layout;
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  auto skip = [](const std::string& name) {
    for (const char* p : {"psi[", "omega[", "nu[", "xi"}) {
      if (name.rfind(p, 0) == 0) return true;
    }
    return false;
  };
  for (std::size_t d = 0; d < draws.states.size(); ++d) {
    const auto flat = flatten_state(draws.states[d], l);
    std::size_t c = 0;
    for (const auto& [name, v] : flat) {
      if (skip(name)) continue;
      if (d == 0) {
        names.push_back(name);
        cols.emplace_back();
      }
      cols[c++].push_back(v);
    }
  }
  if (l.mode != ModelMode::LongitudinalOnly) {
    for (std::size_t t = 0; t < l.global_ticks.size(); ++t) {
      names.push_back("lambda0[" + std::to_string(l.global_ticks[t]) + "]");
      std::vector<double> v;
      for (const auto& s : draws.states) v.push_back(logit_inv(s.mu_h(static_cast<Eigen::Index>(t))));
      cols.push_back(std::move(v));
    }
  }
  return summarize_columns(names, cols);
}

}  // namespace jhgp
