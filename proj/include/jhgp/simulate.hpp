#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jhgp/data_model.hpp"
#include "jhgp/rng.hpp"

namespace jhgp {

struct SimConfig {
  int n_subjects = 50;
  int n_ticks = 25;
  double theta_psi = -0.8;  // AR(1) rho of the individual process
  double phi = 0.9;
  double sigma_y = 0.1;
  double sigma_psi_lo = 0.5;
  double sigma_psi_hi = 1.0;
  double gamma_sd = 1.0;
  // Survival-channel noise. noise_ratio > 0 overrides noise_tau2 with
  // ratio * phi^2 * mean(sigma_psi^2) over the realized subjects.
  double noise_tau2 = 0.0;
  double noise_ratio = 0.0;
  bool censor = false;
  double mask_fraction = 0.0;  // > 0: hold out the later half of that share of subjects
  std::uint64_t seed = 1;

  void validate() const;  // UsageError
  /// sim1 (-0.8, 0.9), sim2 (-0.5, -0.3), sim3 (-0.1, 0.01).
  static SimConfig preset(const std::string& name);
};

struct TruthRow {
  std::string subject_id;
  Tick tick = 0;
  double mu_y = 0.0;
  double mu_h = 0.0;
  double psi = 0.0;
  double lambda = 0.0;
  double y_true = 0.0;  // mu_y + gamma + psi (noise free)
  double h_true = 0.0;  // mu_h + eta + phi psi (+ survival noise)
};

struct SimTruth {
  std::vector<TruthRow> rows;  // subject order, tick order
  std::vector<std::string> subject_ids;
  std::vector<double> gamma;
  std::vector<double> sigma_psi;
  double noise_tau2 = 0.0;

  /// Row for (subject, tick); throws DataError when absent.
  const TruthRow& at(const std::string& subject_id, Tick tick) const;
};

struct SimDataset {
  std::vector<SubjectSeries> data;
  SimTruth truth;
};

double latent_mu_y(double x);
double latent_mu_h(double x);

/// Every subject is observed at ticks 1..n_ticks in both channels.
SimDataset simulate_dataset(const SimConfig& cfg, Rng& rng);

/// Per subject: C = min(max tick, t_c), t_c ~ U(0, 2 max tick); records after C
/// are dropped but the first record is always kept.
std::vector<SubjectSeries> apply_censoring(const std::vector<SubjectSeries>& data, Rng& rng);

/// Censoring of one subject at a given t_c.
SubjectSeries censor_subject(const SubjectSeries& s, double t_c);

struct MaskSplit {
  std::vector<SubjectSeries> train;
  std::vector<SubjectSeries> heldout;  // only masked subjects, only held-out records
  std::vector<std::string> masked_ids;
};

/// Picks round(fraction * n) subjects; each keeps the earlier ceil(m/2) of its m
/// distinct record ticks and the rest moves to `heldout`.
MaskSplit mask_second_half(const std::vector<SubjectSeries>& data, double fraction, Rng& rng);

void write_truth_csv(std::ostream& out, const SimTruth& truth);
SimTruth read_truth_csv(std::istream& in, const std::string& source = "truth");

}  // namespace jhgp
