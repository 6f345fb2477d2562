#include "jhgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "jhgp/data_model.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/survival.hpp"

namespace jhgp {

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median of an empty sample");
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  const double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("pearson: need two aligned samples of size >= 2");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

ScoreReport score(const std::vector<double>& pred_mean, const std::vector<double>& pred_sd,
                  const std::vector<double>& truth, ScoreMode mode) {
  const std::size_t n = truth.size();
  if (pred_mean.size() != n || pred_sd.size() != n) throw DomainError("score: inputs not aligned");
  if (n < 2) throw DomainError("score: need at least 2 points");
  ScoreReport r;
  r.mode = mode;
  r.n = n;
  std::vector<double> absdev(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pred_mean[i] - truth[i];
    absdev[i] = std::abs(e);
    sq += e * e;
  }
  r.mpsd = std::accumulate(pred_sd.begin(), pred_sd.end(), 0.0) / static_cast<double>(n);
  r.mad = median(absdev);
  r.rmse = std::sqrt(sq / static_cast<double>(n));
  r.cor = pearson(pred_mean, truth);
  if (mode == ScoreMode::Relative) {
    double mean_abs_pred = 0.0;
    for (double p : pred_mean) mean_abs_pred += std::abs(p);
    mean_abs_pred /= static_cast<double>(n);
    std::vector<double> abs_truth(n);
    for (std::size_t i = 0; i < n; ++i) abs_truth[i] = std::abs(truth[i]);
    const double med_abs_truth = median(abs_truth);
    const double mt = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double t : truth) ss += (t - mt) * (t - mt);
    const double sd_truth = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd_truth > 0.0)) throw DomainError("score: truth has zero variance, relative mode undefined");
    if (!(mean_abs_pred > 0.0) || !(med_abs_truth > 0.0)) {
      throw DomainError("score: zero normalizer in relative mode");
    }
    r.mpsd /= mean_abs_pred;
    r.mad /= med_abs_truth;
    r.rmse /= sd_truth;
  }
  return r;
}

RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DomainError("roc: scores and labels differ in length");
  double pos = 0.0, neg = 0.0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DomainError("roc: labels must be 0/1");
    (y == 1 ? pos : neg) += 1.0;
  }
  if (pos == 0.0 || neg == 0.0) throw DomainError("roc: both classes must be present");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve c;
  c.fpr.push_back(0.0);
  c.tpr.push_back(0.0);
  c.threshold.push_back(std::numeric_limits<double>::infinity());
  double tp = 0.0, fp = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double thr = scores[order[k]];
    while (k < order.size() && scores[order[k]] == thr) {
      (labels[order[k]] == 1 ? tp : fp) += 1.0;
      ++k;
    }
    c.fpr.push_back(fp / neg);
    c.tpr.push_back(tp / pos);
    c.threshold.push_back(thr);
  }
  // the -infinity threshold calls everything positive; it repeats the last point
  c.fpr.push_back(1.0);
  c.tpr.push_back(1.0);
  c.threshold.push_back(-std::numeric_limits<double>::infinity());
  for (std::size_t i = 1; i < c.fpr.size(); ++i) {
    c.auc += (c.fpr[i] - c.fpr[i - 1]) * 0.5 * (c.tpr[i] + c.tpr[i - 1]);
  }
  return c;
}

double logistic_loglik(double intercept, double slope, const std::vector<double>& x, const std::vector<int>& labels) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = intercept + slope * x[i];
    ll += labels[i] * h - log1p_exp(h);
  }
  return ll;
}

LogisticFit logistic_baseline(const std::vector<double>& x, const std::vector<int>& labels) {
  const std::size_t n = x.size();
  if (labels.size() != n) throw DomainError("logistic_baseline: inputs not aligned");
  if (n < 10) throw DomainError("logistic_baseline: need at least 10 points");
  double pos = 0.0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw DomainError("logistic_baseline: labels must be 0/1");
    pos += y;
  }
  if (pos == 0.0 || pos == static_cast<double>(n)) throw DomainError("logistic_baseline: both classes must be present");

  constexpr double kSlopeCap = 30.0;
  LogisticFit f;
  const double base = pos / static_cast<double>(n);
  f.intercept = std::log(base / (1.0 - base));
  double ll = logistic_loglik(f.intercept, f.slope, x, labels);
  for (int it = 1; it <= 100; ++it) {
    f.iterations = it;
    // Newton step: (X'WX) delta = X'(y - p)
    double h00 = 0.0, h01 = 0.0, h11 = 0.0, g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logit_inv(f.intercept + f.slope * x[i]);
      const double w = p * (1.0 - p);
      h00 += w;
      h01 += w * x[i];
      h11 += w * x[i] * x[i];
      g0 += labels[i] - p;
      g1 += (labels[i] - p) * x[i];
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 1e-300)) {
      f.separation = true;
      break;
    }
    double d0 = (h11 * g0 - h01 * g1) / det;
    double d1 = (h00 * g1 - h01 * g0) / det;
    // step halving keeps the likelihood nondecreasing
    double step = 1.0;
    double b0 = f.intercept + d0, b1 = f.slope + d1;
    double cand = logistic_loglik(b0, b1, x, labels);
    while (cand < ll - 1e-12 && step > 1e-8) {
      step *= 0.5;
      b0 = f.intercept + step * d0;
      b1 = f.slope + step * d1;
      cand = logistic_loglik(b0, b1, x, labels);
    }
    const double change = std::max(std::abs(b0 - f.intercept), std::abs(b1 - f.slope));
    f.intercept = b0;
    f.slope = b1;
    const double gain = cand - ll;
    ll = cand;
    if (std::abs(f.slope) > kSlopeCap) {
      f.separation = true;
      break;
    }
    if (change < 1e-8 || std::abs(gain) < 1e-8 * (1.0 + std::abs(ll))) {
      f.converged = true;
      break;
    }
  }
  // separated data: the likelihood keeps rising toward 0 along the slope
  if (!f.separation && ll > -1e-6) f.separation = true;
  if (f.separation) {
    const double sign = f.slope >= 0.0 ? 1.0 : -1.0;
    if (std::abs(f.slope) > kSlopeCap) f.slope = sign * kSlopeCap;
  }
  f.fitted.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.fitted[i] = logit_inv(f.intercept + f.slope * x[i]);
  return f;
}

void write_score_csv(std::ostream& out, const std::vector<std::pair<std::string, ScoreReport>>& rows) {
  out << "target,mode,n,mpsd,mad,rmse,cor,normalizers\n";
  for (const auto& [name, r] : rows) {
    const bool rel = r.mode == ScoreMode::Relative;
    out << name << ',' << (rel ? "relative" : "absolute") << ',' << r.n << ',' << format_double(r.mpsd) << ','
        << format_double(r.mad) << ',' << format_double(r.rmse) << ',' << format_double(r.cor) << ','
        << (rel ? "mpsd/mean|pred|;mad/median|truth|;rmse/sd(truth)" : "none") << '\n';
  }
}

void write_roc_csv(std::ostream& out, const std::vector<std::pair<std::string, RocCurve>>& curves) {
  out << "model,fpr,tpr,auc\n";
  for (const auto& [name, c] : curves) {
    for (std::size_t i = 0; i < c.fpr.size(); ++i) {
      out << name << ',' << format_double(c.fpr[i]) << ',' << format_double(c.tpr[i]) << ',' << format_double(c.auc)
          << '\n';
    }
  }
}

}  // namespace jhgp
