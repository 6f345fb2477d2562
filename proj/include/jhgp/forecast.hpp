#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jhgp/data_model.hpp"
#include "jhgp/sampler.hpp"

namespace jhgp {

struct ForecastResult {
  std::string subject_id;
  std::vector<Tick> ticks;
  bool has_y = false;
  bool has_lambda = false;
  std::vector<double> y_mean, y_lo, y_hi, y_sd;
  std::vector<double> lambda_mean, lambda_lo, lambda_hi, lambda_sd;
  std::vector<double> pop_mean;  // mean over draws of mu_y(s) + gamma_i
};

/// Per-draw predictive pieces for one subject at ticks s.
struct DrawPrediction {
  Eigen::VectorXd mu_y;  // mean-process value (Kriging mean off the grid)
  Eigen::VectorXd mu_h;
  Eigen::VectorXd psi_mean;
  Eigen::MatrixXd psi_cov;
  double gamma = 0.0;
  double eta = 0.0;
  double phi = 0.0;
};

/// `individual = false` drops the subject's own data (psi from its prior).
DrawPrediction predict_draw(const PosteriorDraws& draws, std::size_t d, const SubjectSeries& subject,
                            const std::vector<Tick>& s, bool individual = true);

/// One sampled path per retained draw; pointwise means and 2.5/97.5% quantiles.
ForecastResult forecast_subject(const PosteriorDraws& draws, const SubjectSeries& subject,
                                const std::vector<Tick>& s, std::uint64_t seed);
ForecastResult population_only_forecast(const PosteriorDraws& draws, const SubjectSeries& subject,
                                        const std::vector<Tick>& s, std::uint64_t seed);

struct ArPaths {
  std::vector<double> krige;
  std::vector<double> recursion;
};

/// Kriging mean of a zero-mean unit-variance AR(1) at n+1..n+steps given
/// x_1..x_n, next to the recursion x_{t+1} = rho x_t.
ArPaths ar_equivalence_check(double rho, const std::vector<double>& series, int steps);

/// Posterior-mean hazard at every event slot of the given subjects.
struct FittedHazard {
  std::vector<std::string> subject_id;
  std::vector<Tick> tick;
  std::vector<double> lambda_mean;
  std::vector<int> r;
  std::vector<double> y;  // observed y at the slot, NaN when absent
};
FittedHazard fitted_hazard(const PosteriorDraws& draws, const std::vector<SubjectSeries>& data);

void write_forecast_csv(std::ostream& out, const std::vector<ForecastResult>& results);
std::vector<ForecastResult> read_forecast_csv(std::istream& in, const std::string& source = "forecast");

}  // namespace jhgp
