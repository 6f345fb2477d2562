#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jhgp/config.hpp"
#include "jhgp/metrics.hpp"
#include "jhgp/sampler.hpp"

namespace jhgp {

// Commands. Each one reads run.out (an existing directory), writes its files
// there together with config.txt and manifest.json, and logs progress to `log`.
void cmd_simulate(const Config& c, std::ostream& log);
void cmd_fit(const Config& c, std::ostream& log);
void cmd_forecast(const Config& c, std::ostream& log);
void cmd_evaluate(const Config& c, std::ostream& log);
/// Returns the number of failed checks (the command itself still succeeds).
int cmd_reproduce(const Config& c, std::ostream& log);

/// Independent stream seed for experiment `k` of a reproduction run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

struct Estimate {
  double mean = 0.0;
  double lo = 0.0;  // 2.5%
  double hi = 0.0;  // 97.5%
  bool covers(double v) const { return lo <= v && v <= hi; }
};
Estimate estimate(const PosteriorDraws& draws, const std::string& column);

struct ReproduceSettings {
  std::uint64_t seed = 20190101;
  int iterations = 10000;
  int burn_in = 5000;
  int thin = 5;
  int chains = 1;
  SamplerConfig sampler() const;  // joint mode with these MCMC controls
};
ReproduceSettings reproduce_settings(const Config& c);

struct Table1Row {
  std::string preset;
  double true_theta = 0.0;
  double true_phi = 0.0;
  Estimate theta;
  Estimate phi;
  std::string reference;
  bool theta_ok = false;
  bool phi_ok = false;
  bool zero_ok = true;  // sim3 only: phi interval covers 0
};
std::vector<Table1Row> reproduce_table1(const ReproduceSettings& s, std::ostream* log = nullptr);

struct Table2Row {
  double ratio = 0.0;
  Estimate phi;
  std::string reference;
};
struct Table2Result {
  std::vector<Table2Row> rows;
  bool stable_ok = false;   // |phi - 0.5| <= 0.15 for ratio <= 4
  bool degrade_ok = false;  // least-squares slope of phi on log(ratio) over ratio >= 8 is negative
  bool covers_ok = false;   // interval at ratio 32 covers 0
  double degrade_slope = 0.0;
};
Table2Result reproduce_table2(const ReproduceSettings& s, std::ostream* log = nullptr);

struct Table3Result {
  ScoreReport y;
  ScoreReport lambda;
  std::size_t masked_subjects = 0;
  bool pass = false;
};
Table3Result reproduce_table3(const ReproduceSettings& s, std::ostream* log = nullptr);

struct Figure4Result {
  RocCurve jhgp;
  RocCurve hgp;
  RocCurve logistic;
  bool pass = false;
};
Figure4Result reproduce_figure4(const ReproduceSettings& s, std::ostream* log = nullptr);

}  // namespace jhgp
