#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jhgp {

enum class ScoreMode { Absolute, Relative };

struct ScoreReport {
  double mpsd = 0.0;
  double mad = 0.0;   // median absolute deviation of prediction from truth
  double rmse = 0.0;
  double cor = 0.0;
  ScoreMode mode = ScoreMode::Absolute;
  std::size_t n = 0;
};

/// Relative mode: MPSD / mean|pred|, MAD / median|truth|, RMSE / sd(truth).
ScoreReport score(const std::vector<double>& pred_mean, const std::vector<double>& pred_sd,
                  const std::vector<double>& truth, ScoreMode mode);

double pearson(const std::vector<double>& a, const std::vector<double>& b);
double median(std::vector<double> v);

struct RocCurve {
  std::vector<double> fpr;  // starts at 0, ends at 1
  std::vector<double> tpr;
  std::vector<double> threshold;  // score >= threshold is called positive
  double auc = 0.0;
};

/// Threshold sweep over the distinct scores plus +-infinity; ties move both
/// rates at once, so the trapezoid equals the tie-averaged rank statistic.
RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<double> fitted;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
};

/// Maximum-likelihood logistic regression of labels on one covariate by IRLS
/// (tolerance 1e-8, at most 100 iterations). Slope is capped at +-30 and the
/// separation flag raised when it diverges.
LogisticFit logistic_baseline(const std::vector<double>& x, const std::vector<int>& labels);

double logistic_loglik(double intercept, double slope, const std::vector<double>& x, const std::vector<int>& labels);

void write_score_csv(std::ostream& out, const std::vector<std::pair<std::string, ScoreReport>>& rows);
void write_roc_csv(std::ostream& out, const std::vector<std::pair<std::string, RocCurve>>& curves);

}  // namespace jhgp
