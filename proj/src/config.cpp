#include "jhgp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

#include "jhgp/csv.hpp"
#include "jhgp/errors.hpp"

namespace jhgp {

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      "run.seed", "run.out",
      "data.longitudinal", "data.events", "data.truth", "data.draws", "data.forecast",
      "sim.preset", "sim.n_subjects", "sim.n_ticks", "sim.theta_psi", "sim.phi", "sim.sigma_y",
      "sim.sigma_psi_lo", "sim.sigma_psi_hi", "sim.gamma_sd", "sim.noise_tau2", "sim.noise_ratio",
      "sim.censor", "sim.mask_fraction",
      "model.mode", "model.psi_kernel", "model.mu_y_kernel", "model.mu_h_kernel", "model.psi_hyper_prior",
      "model.g_phi", "model.mu_phi", "model.sample_phi_hyper", "model.variance_floor",
      "mcmc.iterations", "mcmc.burn_in", "mcmc.thin", "mcmc.chains", "mcmc.target_accept",
      "mcmc.adapt_interval", "mcmc.keep_omega",
      "forecast.ticks", "forecast.subjects", "forecast.population_only",
      "reproduce.which",
  };
  return keys;
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(source + ":" + std::to_string(no) + ": expected 'section.key = value'");
    }
    try {
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(no) + ": " + e.what());
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config file " + file.string());
  return parse(in, file.string());
}

void Config::set(const std::string& key, const std::string& value) {
  const auto& k = known_keys();
  if (std::find(k.begin(), k.end(), key) == k.end()) throw UsageError("unknown config key '" + key + "'");
  values_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw UsageError("missing required setting '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  try {
    return parse_double(get(key), key);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  try {
    return static_cast<int>(parse_integer(get(key), key));
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError(key + ": expected true or false, got '" + v + "'");
}

std::uint64_t Config::seed() const {
  const std::string v = require("run.seed");
  std::uint64_t s = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
  if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("run.seed: not an unsigned integer: '" + v + "'");
  return s;
}

SamplerConfig sampler_config(const Config& c) {
  SamplerConfig s;
  if (c.has("model.mode")) s.mode = model_mode_from_string(c.get("model.mode"));
  s.iterations = c.get_int("mcmc.iterations", s.iterations);
  s.burn_in = c.get_int("mcmc.burn_in", s.burn_in);
  s.thin = c.get_int("mcmc.thin", s.thin);
  try {
    if (c.has("model.psi_kernel")) s.psi_kernel = KernelSpec::from_text(c.get("model.psi_kernel"));
    if (c.has("model.mu_y_kernel") && c.get("model.mu_y_kernel") != "auto") {
      s.mu_y_kernel = KernelSpec::from_text(c.get("model.mu_y_kernel"));
    }
    if (c.has("model.mu_h_kernel") && c.get("model.mu_h_kernel") != "auto") {
      s.mu_h_kernel = KernelSpec::from_text(c.get("model.mu_h_kernel"));
    }
  } catch (const std::exception& e) {
    throw UsageError(std::string("kernel setting: ") + e.what());
  }
  if (c.has("model.psi_hyper_prior")) {
    const std::string p = c.get("model.psi_hyper_prior");
    if (p == "jeffreys") s.psi_hyper_prior = PsiHyperPrior::Jeffreys;
    else if (p == "uniform") s.psi_hyper_prior = PsiHyperPrior::Uniform;
    else throw UsageError("model.psi_hyper_prior: expected jeffreys or uniform");
  }
  s.g_phi = c.get_double("model.g_phi", s.g_phi);
  s.mu_phi = c.get_double("model.mu_phi", s.mu_phi);
  s.sample_phi_hyper = c.get_bool("model.sample_phi_hyper", s.sample_phi_hyper);
  s.variance_floor = c.get_double("model.variance_floor", s.variance_floor);
  s.target_accept = c.get_double("mcmc.target_accept", s.target_accept);
  s.adapt_interval = c.get_int("mcmc.adapt_interval", s.adapt_interval);
  s.keep_omega = c.get_bool("mcmc.keep_omega", s.keep_omega);
  s.validate();
  return s;
}

SimConfig sim_config(const Config& c) {
  SimConfig s = c.has("sim.preset") ? SimConfig::preset(c.get("sim.preset")) : SimConfig{};
  s.n_subjects = c.get_int("sim.n_subjects", s.n_subjects);
  s.n_ticks = c.get_int("sim.n_ticks", s.n_ticks);
  s.theta_psi = c.get_double("sim.theta_psi", s.theta_psi);
  s.phi = c.get_double("sim.phi", s.phi);
  s.sigma_y = c.get_double("sim.sigma_y", s.sigma_y);
  s.sigma_psi_lo = c.get_double("sim.sigma_psi_lo", s.sigma_psi_lo);
  s.sigma_psi_hi = c.get_double("sim.sigma_psi_hi", s.sigma_psi_hi);
  s.gamma_sd = c.get_double("sim.gamma_sd", s.gamma_sd);
  s.noise_tau2 = c.get_double("sim.noise_tau2", s.noise_tau2);
  s.noise_ratio = c.get_double("sim.noise_ratio", s.noise_ratio);
  s.censor = c.get_bool("sim.censor", s.censor);
  s.mask_fraction = c.get_double("sim.mask_fraction", s.mask_fraction);
  s.seed = c.seed();
  s.validate();
  return s;
}

std::vector<Tick> parse_tick_list(const std::string& text) {
  std::vector<Tick> out;
  for (const auto& part : split_row(text)) {
    const std::string p = trim(part);
    if (p.empty()) continue;
    try {
      if (const auto colon = p.find(':'); colon != std::string::npos) {
        const Tick a = parse_integer(trim(p.substr(0, colon)), "tick range");
        const Tick b = parse_integer(trim(p.substr(colon + 1)), "tick range");
        if (b < a) throw UsageError("tick range '" + p + "' is decreasing");
        for (Tick t = a; t <= b; ++t) out.push_back(t);
      } else {
        out.push_back(parse_integer(p, "tick"));
      }
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw UsageError("empty tick list");
  return out;
}

}  // namespace jhgp
