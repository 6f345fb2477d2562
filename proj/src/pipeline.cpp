#include "jhgp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "jhgp/csv.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/forecast.hpp"
#include "jhgp/persistence.hpp"
#include "jhgp/simulate.hpp"

namespace jhgp {

namespace fs = std::filesystem;

namespace {

class RunOutput {
 public:
  RunOutput(const Config& c, std::string command) : dir_(c.require("run.out")) {
    if (!fs::is_directory(dir_)) throw UsageError("output directory does not exist: " + dir_.string());
    m_.command = std::move(command);
    m_.seed = c.seed();
    m_.started = timestamp_now();
  }

  void write(const std::string& rel, const std::string& content, const std::string& role) {
    write_text_file(dir_ / rel, content);
    register_file(m_, dir_, rel, role);
  }

  void finish(const std::map<std::string, std::string>& config) {
    m_.config = config;
    write("config.txt", config_echo_text(config), "config");
    m_.finished = timestamp_now();
    write_manifest(m_, dir_);
  }

  const fs::path& dir() const { return dir_; }
  RunManifest& manifest() { return m_; }

 private:
  fs::path dir_;
  RunManifest m_;
};

std::map<std::string, std::string> sim_echo(const SimConfig& s) {
  return {{"sim.n_subjects", std::to_string(s.n_subjects)},
          {"sim.n_ticks", std::to_string(s.n_ticks)},
          {"sim.theta_psi", format_double(s.theta_psi)},
          {"sim.phi", format_double(s.phi)},
          {"sim.sigma_y", format_double(s.sigma_y)},
          {"sim.sigma_psi_lo", format_double(s.sigma_psi_lo)},
          {"sim.sigma_psi_hi", format_double(s.sigma_psi_hi)},
          {"sim.gamma_sd", format_double(s.gamma_sd)},
          {"sim.noise_tau2", format_double(s.noise_tau2)},
          {"sim.noise_ratio", format_double(s.noise_ratio)},
          {"sim.censor", s.censor ? "true" : "false"},
          {"sim.mask_fraction", format_double(s.mask_fraction)}};
}

std::map<std::string, std::string> resolved(const Config& c, const std::map<std::string, std::string>& defaults) {
  auto out = defaults;
  for (const auto& [k, v] : c.values()) out[k] = v;
  out.erase("run.out");  // keeps outputs independent of where they are written
  return out;
}

std::vector<SubjectSeries> load_data(const Config& c) {
  return ingest_csv(c.require("data.longitudinal"), c.get("data.events"));
}

std::string data_csv(const std::vector<SubjectSeries>& d, bool events) {
  std::ostringstream os;
  if (events) write_events_csv(os, d);
  else write_longitudinal_csv(os, d);
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "name,mean,sd,q025,q975\n";
  for (const auto& r : rows) {
    os << r.name << ',' << format_double(r.mean) << ',' << format_double(r.sd) << ',' << format_double(r.q025)
       << ',' << format_double(r.q975) << '\n';
  }
  return os.str();
}

std::string hazard_csv(const FittedHazard& h) {
  std::ostringstream os;
  os << "subject_id,tick,lambda_mean,r,y\n";
  for (std::size_t k = 0; k < h.tick.size(); ++k) {
    os << h.subject_id[k] << ',' << h.tick[k] << ',' << format_double(h.lambda_mean[k]) << ',' << h.r[k] << ','
       << (std::isnan(h.y[k]) ? std::string("NA") : format_double(h.y[k])) << '\n';
  }
  return os.str();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string fmt(const Estimate& e) { return fmt(e.mean, 2) + " (" + fmt(e.lo, 2) + ", " + fmt(e.hi, 2) + ")"; }

PosteriorDraws fit(const std::vector<SubjectSeries>& data, const SamplerConfig& cfg, std::uint64_t seed, int chains) {
  return run_chains(data, cfg, seed, chains);
}

// Roc on fitted hazards; logistic baseline regresses r on the observed y.
RocCurve hazard_roc(const FittedHazard& h) { return roc(h.lambda_mean, h.r); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over (seed, k)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Estimate estimate(const PosteriorDraws& draws, const std::string& column) {
  if (draws.states.empty()) throw DataError("estimate: no draws");
  std::vector<double> v;
  v.reserve(draws.size());
  for (const auto& s : draws.states) {
    bool found = false;
    for (const auto& [name, x] : flatten_state(s, draws.layout)) {
      if (name == column) {
        v.push_back(x);
        found = true;
        break;
      }
    }
    if (!found) throw DataError("estimate: no column '" + column + "'");
  }
  Estimate e;
  for (double x : v) e.mean += x;
  e.mean /= static_cast<double>(v.size());
  e.lo = quantile(v, 0.025);
  e.hi = quantile(v, 0.975);
  return e;
}

// ---------------------------------------------------------------------------
// commands

void cmd_simulate(const Config& c, std::ostream& log) {
  RunOutput out(c, "simulate");
  const SimConfig sc = sim_config(c);
  Rng rng(sc.seed);
  const SimDataset ds = simulate_dataset(sc, rng);
  std::vector<SubjectSeries> train = ds.data;
  if (sc.mask_fraction > 0.0) {
    const MaskSplit split = mask_second_half(ds.data, sc.mask_fraction, rng);
    train = split.train;
    out.write("heldout_longitudinal.csv", data_csv(split.heldout, false), "heldout");
    out.write("heldout_events.csv", data_csv(split.heldout, true), "heldout");
    std::string ids = "subject_id\n";
    for (const auto& id : split.masked_ids) ids += id + "\n";
    out.write("masked_subjects.csv", ids, "heldout");
  }
  out.write("longitudinal.csv", data_csv(train, false), "data");
  out.write("events.csv", data_csv(train, true), "data");
  std::ostringstream truth;
  write_truth_csv(truth, ds.truth);
  out.write("truth.csv", truth.str(), "truth");
  out.finish(resolved(c, sim_echo(sc)));
  log << "simulated " << ds.data.size() << " subjects x " << sc.n_ticks << " ticks (theta_psi " << sc.theta_psi
      << ", phi " << sc.phi << ") into " << out.dir().string() << "\n";
}

void cmd_fit(const Config& c, std::ostream& log) {
  RunOutput out(c, "fit");
  const SamplerConfig sc = sampler_config(c);
  const int chains = c.get_int("mcmc.chains", 1);
  const auto data = load_data(c);
  for (const auto& w : ModelData::build(data, sc.mode).warnings) log << "warning: " << w << "\n";
  const PosteriorDraws draws = fit(data, sc, c.seed(), chains);
  write_draws(draws, out.dir(), out.manifest());
  const auto summary = draws.states.empty() ? std::vector<SummaryRow>{} : summarize(draws);
  out.write("summary.csv", summary_csv(summary), "summary");
  if (sc.mode != ModelMode::LongitudinalOnly && !draws.states.empty()) {
    out.write("fitted_hazard.csv", hazard_csv(fitted_hazard(draws, data)), "plot");
  }
  auto echo = sc.echo();
  echo["mcmc.chains"] = std::to_string(chains);
  out.finish(resolved(c, echo));
  log << "fit " << to_string(sc.mode) << ": " << draws.size() << " draws from " << chains << " chain(s)\n";
  for (const auto& r : summary) {
    if (r.name == "phi" || r.name.rfind("theta_psi", 0) == 0 || r.name == "sigma2_y") {
      log << "  " << r.name << " " << fmt(r.mean) << " (" << fmt(r.q025) << ", " << fmt(r.q975) << ")\n";
    }
  }
}

void cmd_forecast(const Config& c, std::ostream& log) {
  RunOutput out(c, "forecast");
  const PosteriorDraws draws = read_draws(c.require("data.draws"));
  if (draws.states.empty()) throw DataError("forecast: the draws directory holds no draws");
  const auto data = load_data(c);
  const std::string sel = c.get("forecast.subjects", "all");
  const std::string ticks = c.get("forecast.ticks", "next:5");
  const bool pop = c.get_bool("forecast.population_only", false);

  std::vector<const SubjectSeries*> chosen;
  if (sel == "all") {
    for (const auto& s : data) {
      const auto& ids = draws.layout.subject_ids;
      if (std::find(ids.begin(), ids.end(), s.subject_id) != ids.end()) chosen.push_back(&s);
      else log << "warning: subject " << s.subject_id << " is not in the fitted model, skipped\n";
    }
  } else {
    for (const auto& id : split_row(sel)) {
      const auto it = std::find_if(data.begin(), data.end(), [&](const SubjectSeries& s) { return s.subject_id == id; });
      if (it == data.end()) throw DataError("forecast: subject '" + id + "' is not in the data");
      draws.layout.subject_index(id);
      chosen.push_back(&*it);
    }
  }

  std::vector<ForecastResult> results;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const SubjectSeries& s = *chosen[k];
    std::vector<Tick> at;
    if (ticks.rfind("next:", 0) == 0) {
      const long long n = parse_integer(ticks.substr(5), "forecast.ticks");
      if (n < 1) throw UsageError("forecast.ticks: next:K needs K >= 1");
      for (Tick t = 1; t <= n; ++t) at.push_back(s.last_tick() + t);
    } else {
      at = parse_tick_list(ticks);
    }
    const std::uint64_t seed = derive_seed(c.seed(), k);
    results.push_back(pop ? population_only_forecast(draws, s, at, seed) : forecast_subject(draws, s, at, seed));
  }
  std::ostringstream os;
  write_forecast_csv(os, results);
  out.write("forecast.csv", os.str(), "forecast");
  out.finish(resolved(c, {{"forecast.subjects", sel}, {"forecast.ticks", ticks},
                          {"forecast.population_only", pop ? "true" : "false"}}));
  log << "forecast " << results.size() << " subject(s)\n";
}

void cmd_evaluate(const Config& c, std::ostream& log) {
  RunOutput out(c, "evaluate");
  std::ifstream fin(c.require("data.forecast"));
  if (!fin) throw DataError("cannot open " + c.get("data.forecast"));
  const auto results = read_forecast_csv(fin, c.get("data.forecast"));
  std::ifstream tin(c.require("data.truth"));
  if (!tin) throw DataError("cannot open " + c.get("data.truth"));
  const SimTruth truth = read_truth_csv(tin, c.get("data.truth"));

  std::vector<double> ym, ys, yt, lm, ls, lt;
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.ticks.size(); ++k) {
      const TruthRow& t = truth.at(r.subject_id, r.ticks[k]);
      if (r.has_y && !std::isnan(r.y_mean[k])) {
        ym.push_back(r.y_mean[k]);
        ys.push_back(r.y_sd[k]);
        yt.push_back(t.y_true);
      }
      if (r.has_lambda && !std::isnan(r.lambda_mean[k])) {
        lm.push_back(r.lambda_mean[k]);
        ls.push_back(r.lambda_sd[k]);
        lt.push_back(t.lambda);
      }
    }
  }
  std::vector<std::pair<std::string, ScoreReport>> rows;
  if (!ym.empty()) {
    rows.emplace_back("y", score(ym, ys, yt, ScoreMode::Relative));
    rows.emplace_back("y", score(ym, ys, yt, ScoreMode::Absolute));
  }
  if (!lm.empty()) {
    rows.emplace_back("lambda", score(lm, ls, lt, ScoreMode::Relative));
    rows.emplace_back("lambda", score(lm, ls, lt, ScoreMode::Absolute));
  }
  if (rows.empty()) throw DataError("evaluate: forecast has no scorable values");
  std::ostringstream os;
  write_score_csv(os, rows);
  out.write("scores.csv", os.str(), "scores");
  for (const auto& [target, r] : rows) {
    if (r.mode == ScoreMode::Relative) {
      log << target << ": n " << r.n << "  MPSD " << fmt(r.mpsd) << "  MAD " << fmt(r.mad) << "  RMSE " << fmt(r.rmse)
          << "  Cor " << fmt(r.cor) << "\n";
    }
  }

  if (c.has("data.draws") && c.has("data.longitudinal")) {
    const PosteriorDraws draws = read_draws(c.get("data.draws"));
    const FittedHazard h = fitted_hazard(draws, load_data(c));
    std::vector<double> x;
    std::vector<int> lab;
    for (std::size_t k = 0; k < h.tick.size(); ++k) {
      if (std::isnan(h.y[k])) continue;
      x.push_back(h.y[k]);
      lab.push_back(h.r[k]);
    }
    std::vector<std::pair<std::string, RocCurve>> curves{{to_string(draws.layout.mode), hazard_roc(h)}};
    if (!x.empty()) curves.emplace_back("logistic", roc(logistic_baseline(x, lab).fitted, lab));
    std::ostringstream ros;
    write_roc_csv(ros, curves);
    out.write("roc.csv", ros.str(), "plot");
    for (const auto& [name, cv] : curves) log << "AUC " << name << " " << fmt(cv.auc) << "\n";
  }
  out.finish(resolved(c, {}));
}

// ---------------------------------------------------------------------------
// reproduction

SamplerConfig ReproduceSettings::sampler() const {
  SamplerConfig s;
  s.iterations = iterations;
  s.burn_in = burn_in;
  s.thin = thin;
  s.validate();
  return s;
}

ReproduceSettings reproduce_settings(const Config& c) {
  ReproduceSettings s;
  s.seed = c.seed();
  s.iterations = c.get_int("mcmc.iterations", s.iterations);
  s.burn_in = c.get_int("mcmc.burn_in", s.burn_in);
  s.thin = c.get_int("mcmc.thin", s.thin);
  s.chains = c.get_int("mcmc.chains", s.chains);
  s.sampler();
  return s;
}

std::vector<Table1Row> reproduce_table1(const ReproduceSettings& s, std::ostream* log) {
  const char* presets[] = {"sim1", "sim2", "sim3"};
  const char* reference[] = {"-0.77 (-0.81, -0.74) / 0.86 (0.69, 1.04)", "-0.53 (-0.48, -0.57) / -0.28 (-0.44, -0.12)",
                         "-0.09 (-0.14, -0.02) / 0.03 (-0.10, 0.18)"};
  std::vector<Table1Row> rows;
  for (std::uint64_t k = 0; k < 3; ++k) {
    SimConfig sc = SimConfig::preset(presets[k]);
    Rng rng(derive_seed(s.seed, k));
    const SimDataset ds = simulate_dataset(sc, rng);
    const PosteriorDraws d = fit(ds.data, s.sampler(), derive_seed(s.seed, 100 + k), s.chains);
    Table1Row r;
    r.preset = presets[k];
    r.true_theta = sc.theta_psi;
    r.true_phi = sc.phi;
    r.theta = estimate(d, "theta_psi");
    r.phi = estimate(d, "phi");
    r.reference = reference[k];
    r.theta_ok = std::abs(r.theta.mean - r.true_theta) <= 0.10;
    r.phi_ok = std::abs(r.phi.mean - r.true_phi) <= 0.15;
    if (r.preset == "sim3") r.zero_ok = r.phi.covers(0.0);
    if (log) *log << "  " << r.preset << ": theta_psi " << fmt(r.theta) << ", phi " << fmt(r.phi) << "\n";
    rows.push_back(r);
  }
  return rows;
}

Table2Result reproduce_table2(const ReproduceSettings& s, std::ostream* log) {
  const double ratios[] = {0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  const char* reference[] = {"0.50 (0.34, 0.65)", "0.46 (0.29, 0.58)", "0.51 (0.37, 0.66)", "0.44 (0.30, 0.58)",
                         "0.45 (0.30, 0.60)", "0.25 (0.13, 0.37)", "0.23 (0.11, 0.36)", "0.09 (-0.03, 0.22)"};
  Table2Result out;
  out.stable_ok = true;
  for (std::uint64_t k = 0; k < 8; ++k) {
    SimConfig sc = SimConfig::preset("sim1");
    sc.phi = 0.5;
    sc.noise_ratio = ratios[k];
    Rng rng(derive_seed(s.seed, 200 + k));
    const SimDataset ds = simulate_dataset(sc, rng);
    const PosteriorDraws d = fit(ds.data, s.sampler(), derive_seed(s.seed, 300 + k), s.chains);
    Table2Row r{ratios[k], estimate(d, "phi"), reference[k]};
    if (r.ratio <= 4.0 && std::abs(r.phi.mean - 0.5) > 0.15) out.stable_ok = false;
    if (log) *log << "  ratio " << r.ratio << ": phi " << fmt(r.phi) << "\n";
    out.rows.push_back(r);
  }
  // slope of phi on log(ratio) over the high-noise rows
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& r : out.rows) {
    if (r.ratio < 8.0) continue;
    const double x = std::log(r.ratio);
    sx += x;
    sy += r.phi.mean;
    sxx += x * x;
    sxy += x * r.phi.mean;
    n += 1;
  }
  out.degrade_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.degrade_ok = out.degrade_slope < 0.0;
  out.covers_ok = out.rows.back().phi.covers(0.0);
  return out;
}

Table3Result reproduce_table3(const ReproduceSettings& s, std::ostream* log) {
  SimConfig sc = SimConfig::preset("sim1");
  sc.censor = true;
  Rng rng(derive_seed(s.seed, 400));
  const SimDataset ds = simulate_dataset(sc, rng);
  const MaskSplit split = mask_second_half(ds.data, 0.5, rng);
  const PosteriorDraws d = fit(split.train, s.sampler(), derive_seed(s.seed, 401), s.chains);

  std::vector<double> ym, ys, yt, lm, ls, lt;
  Table3Result out;
  for (std::size_t k = 0; k < split.heldout.size(); ++k) {
    const SubjectSeries& h = split.heldout[k];
    const auto& ids = d.layout.subject_ids;
    if (std::find(ids.begin(), ids.end(), h.subject_id) == ids.end()) continue;
    const auto it = std::find_if(split.train.begin(), split.train.end(),
                                 [&](const SubjectSeries& t) { return t.subject_id == h.subject_id; });
    std::vector<Tick> at = h.obs_ticks;
    at.insert(at.end(), h.event_ticks.begin(), h.event_ticks.end());
    std::sort(at.begin(), at.end());
    at.erase(std::unique(at.begin(), at.end()), at.end());
    if (at.empty()) continue;
    ++out.masked_subjects;
    const ForecastResult f = forecast_subject(d, *it, at, derive_seed(s.seed, 500 + k));
    for (std::size_t j = 0; j < at.size(); ++j) {
      const TruthRow& t = ds.truth.at(h.subject_id, at[j]);
      if (std::binary_search(h.obs_ticks.begin(), h.obs_ticks.end(), at[j])) {
        ym.push_back(f.y_mean[j]);
        ys.push_back(f.y_sd[j]);
        yt.push_back(t.y_true);
      }
      if (std::binary_search(h.event_ticks.begin(), h.event_ticks.end(), at[j])) {
        lm.push_back(f.lambda_mean[j]);
        ls.push_back(f.lambda_sd[j]);
        lt.push_back(t.lambda);
      }
    }
  }
  out.y = score(ym, ys, yt, ScoreMode::Relative);
  out.lambda = score(lm, ls, lt, ScoreMode::Relative);
  out.pass = out.y.cor >= 0.80 && out.lambda.cor >= 0.65 && out.y.mad <= 0.75;
  if (log) {
    *log << "  " << out.masked_subjects << " masked subjects; Y: MPSD " << fmt(out.y.mpsd, 2) << " MAD "
         << fmt(out.y.mad, 2) << " RMSE " << fmt(out.y.rmse, 2) << " Cor " << fmt(out.y.cor, 2) << "; lambda: MPSD "
         << fmt(out.lambda.mpsd, 2) << " MAD " << fmt(out.lambda.mad, 2) << " RMSE " << fmt(out.lambda.rmse, 2)
         << " Cor " << fmt(out.lambda.cor, 2) << "\n";
  }
  return out;
}

Figure4Result reproduce_figure4(const ReproduceSettings& s, std::ostream* log) {
  const SimConfig sc = SimConfig::preset("sim1");
  Rng rng(derive_seed(s.seed, 600));
  const SimDataset ds = simulate_dataset(sc, rng);
  Figure4Result out;

  const PosteriorDraws joint = fit(ds.data, s.sampler(), derive_seed(s.seed, 601), s.chains);
  const FittedHazard hj = fitted_hazard(joint, ds.data);
  out.jhgp = hazard_roc(hj);

  SamplerConfig so = s.sampler();
  so.mode = ModelMode::SurvivalOnly;
  const PosteriorDraws surv = fit(ds.data, so, derive_seed(s.seed, 602), s.chains);
  out.hgp = hazard_roc(fitted_hazard(surv, ds.data));

  std::vector<double> x;
  std::vector<int> lab;
  for (std::size_t k = 0; k < hj.tick.size(); ++k) {
    if (std::isnan(hj.y[k])) continue;
    x.push_back(hj.y[k]);
    lab.push_back(hj.r[k]);
  }
  out.logistic = roc(logistic_baseline(x, lab).fitted, lab);
  out.pass = out.jhgp.auc > out.hgp.auc && out.hgp.auc > out.logistic.auc && out.jhgp.auc >= 0.78 &&
             out.logistic.auc <= 0.70;
  if (log) {
    *log << "  AUC jhgp " << fmt(out.jhgp.auc) << ", survival-only " << fmt(out.hgp.auc) << ", logistic "
         << fmt(out.logistic.auc) << "\n";
  }
  return out;
}

namespace {

struct ReportLine {
  std::string target;
  std::string quantity;
  std::string reference;
  std::string obtained;
  std::string check;
  bool pass = false;
};

}  // namespace

int cmd_reproduce(const Config& c, std::ostream& log) {
  RunOutput out(c, "reproduce");
  const ReproduceSettings s = reproduce_settings(c);
  const std::string which = c.get("reproduce.which", "all");
  const bool all = which == "all";
  if (!all && which != "table1" && which != "table2" && which != "table3" && which != "figure4") {
    throw UsageError("reproduce: unknown target '" + which + "' (table1, table2, table3, figure4, all)");
  }

  std::vector<ReportLine> lines;
  const auto stage = [&](const std::string& name, const auto& body) {
    log << name << "\n";
    try {
      body();
    } catch (const UsageError&) {
      throw;
    } catch (const NumericalError& e) {
      throw NumericalError(name + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(name + ": " + e.what());
    }
  };

  if (all || which == "table1") {
    stage("table1", [&] {
      for (const auto& r : reproduce_table1(s, &log)) {
        lines.push_back({"table1", r.preset + " theta_psi", r.reference.substr(0, r.reference.find(" / ")), fmt(r.theta),
                         "|mean - " + fmt(r.true_theta, 2) + "| <= 0.10", r.theta_ok});
        lines.push_back({"table1", r.preset + " phi", r.reference.substr(r.reference.find(" / ") + 3), fmt(r.phi),
                         "|mean - " + fmt(r.true_phi, 2) + "| <= 0.15", r.phi_ok});
        if (r.preset == "sim3") lines.push_back({"table1", "sim3 phi", "", fmt(r.phi), "interval covers 0", r.zero_ok});
      }
    });
  }
  if (all || which == "table2") {
    stage("table2", [&] {
      const Table2Result t = reproduce_table2(s, &log);
      for (const auto& r : t.rows) {
        lines.push_back({"table2", "phi at ratio " + format_double(r.ratio), r.reference, fmt(r.phi),
                         r.ratio <= 4.0 ? "|mean - 0.50| <= 0.15" : "", r.ratio <= 4.0 ? std::abs(r.phi.mean - 0.5) <= 0.15 : true});
      }
      lines.push_back({"table2", "trend over ratio >= 8", "", "slope " + fmt(t.degrade_slope), "slope < 0", t.degrade_ok});
      lines.push_back({"table2", "phi at ratio 32", "", fmt(t.rows.back().phi), "interval covers 0", t.covers_ok});
    });
  }
  if (all || which == "table3") {
    stage("table3", [&] {
      const Table3Result t = reproduce_table3(s, &log);
      lines.push_back({"table3", "Y Cor", "0.86", fmt(t.y.cor, 2), ">= 0.80", t.y.cor >= 0.80});
      lines.push_back({"table3", "lambda Cor", "0.73", fmt(t.lambda.cor, 2), ">= 0.65", t.lambda.cor >= 0.65});
      lines.push_back({"table3", "Y MAD (relative)", "0.64", fmt(t.y.mad, 2), "<= 0.75", t.y.mad <= 0.75});
      lines.push_back({"table3", "Y MPSD (relative)", "0.25", fmt(t.y.mpsd, 2), "", true});
      lines.push_back({"table3", "Y RMSE (relative)", "0.52", fmt(t.y.rmse, 2), "", true});
      lines.push_back({"table3", "lambda MPSD (relative)", "0.19", fmt(t.lambda.mpsd, 2), "", true});
      lines.push_back({"table3", "lambda MAD (relative)", "0.30", fmt(t.lambda.mad, 2), "", true});
      lines.push_back({"table3", "lambda RMSE (relative)", "0.71", fmt(t.lambda.rmse, 2), "", true});
    });
  }
  if (all || which == "figure4") {
    stage("figure4", [&] {
      const Figure4Result f = reproduce_figure4(s, &log);
      lines.push_back({"figure4", "AUC jhgp", "0.828", fmt(f.jhgp.auc), ">= 0.78", f.jhgp.auc >= 0.78});
      lines.push_back({"figure4", "AUC survival-only", "0.782", fmt(f.hgp.auc), "", true});
      lines.push_back({"figure4", "AUC logistic", "0.626", fmt(f.logistic.auc), "<= 0.70", f.logistic.auc <= 0.70});
      lines.push_back({"figure4", "ordering", "", "", "jhgp > survival-only > logistic",
                       f.jhgp.auc > f.hgp.auc && f.hgp.auc > f.logistic.auc});
      std::ostringstream ros;
      write_roc_csv(ros, {{"jhgp", f.jhgp}, {"survival-only", f.hgp}, {"logistic", f.logistic}});
      out.write("roc.csv", ros.str(), "plot");
    });
  }

  int failed = 0;
  std::ostringstream csv, txt;
  csv << "target,quantity,reference,obtained,check,result\n";
  txt << std::left << std::setw(9) << "target" << std::setw(26) << "quantity" << std::setw(42) << "reference"
      << std::setw(24) << "obtained" << std::setw(32) << "check" << "result\n";
  for (const auto& l : lines) {
    const std::string result = l.check.empty() ? "-" : (l.pass ? "PASS" : "FAIL");
    if (!l.check.empty() && !l.pass) ++failed;
    csv << l.target << ',' << l.quantity << ",\"" << l.reference << "\",\"" << l.obtained << "\",\"" << l.check
        << "\"," << result << '\n';
    txt << std::setw(9) << l.target << std::setw(26) << l.quantity << std::setw(42) << l.reference << std::setw(24)
        << l.obtained << std::setw(32) << l.check << result << '\n';
  }
  out.write("report.csv", csv.str(), "report");
  out.write("report.txt", txt.str(), "report");
  auto echo = s.sampler().echo();
  echo["mcmc.chains"] = std::to_string(s.chains);
  echo["reproduce.which"] = which;
  out.finish(resolved(c, echo));
  log << txt.str();
  log << failed << " check(s) failed\n";
  return failed;
}

}  // namespace jhgp
