#pragma once

#include <Eigen/Dense>

#include "jhgp/rng.hpp"

namespace jhgp {

/// Symmetric covariance with a lazily computed Cholesky factor.
///
/// Factorization starts with no extra jitter and escalates 1e-10, 1e-9, ...,
/// 1e-6 (added to the diagonal) on failure before raising NumericalError.
class CovMatrix {
 public:
  CovMatrix() = default;
  explicit CovMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index size() const { return m_.rows(); }

  /// Lower-triangular factor L with L L' = matrix + jitter_used() * I.
  const Eigen::MatrixXd& cholesky() const;
  double jitter_used() const {
    cholesky();
    return jitter_;
  }
  /// Solve (matrix + jitter) x = b.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  double log_det() const;

 private:
  Eigen::MatrixXd m_;
  mutable Eigen::MatrixXd l_;
  mutable bool factored_ = false;
  mutable double jitter_ = 0.0;
};

/// Cholesky with the jitter escalation policy. Returns L; `jitter_out` receives
/// the extra diagonal that was needed.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& a, double* jitter_out = nullptr);

/// (A + A') / 2
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

struct GaussianDist {
  Eigen::VectorXd mean;
  CovMatrix cov;
};

double mvn_logpdf(const Eigen::VectorXd& x, const GaussianDist& dist);

/// mean + L z with z standard normal.
Eigen::VectorXd mvn_sample(const GaussianDist& dist, Rng& rng);

/// GP posterior of f given y = f + e, e ~ N(0, noise_var I).
GaussianDist gp_posterior(const Eigen::VectorXd& prior_mean, const CovMatrix& prior_cov,
                          const Eigen::VectorXd& y, double noise_var);

/// Kriging predictor of f(s) given y(t). `cov_st` is |s| x |t|.
GaussianDist krige(const Eigen::VectorXd& prior_mean_t, const Eigen::VectorXd& prior_mean_s,
                   const CovMatrix& cov_tt, const CovMatrix& cov_ss, const Eigen::MatrixXd& cov_st,
                   const Eigen::VectorXd& y_t, double noise_var);

/// Gaussian whose density is proportional to N(x; 0, K) exp(-x'Px/2 + b'x) with
/// P = diag(precision) >= 0. Computed through B = I + S K S, S = sqrt(P), so K
/// is never inverted and zero-precision coordinates are allowed.
struct GaussianConditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
GaussianConditional gaussian_conditional(const Eigen::MatrixXd& prior_cov,
                                         const Eigen::VectorXd& precision,
                                         const Eigen::VectorXd& linear);

/// One draw from the distribution above.
Eigen::VectorXd sample_gaussian_conditional(const Eigen::MatrixXd& prior_cov,
                                            const Eigen::VectorXd& precision,
                                            const Eigen::VectorXd& linear, Rng& rng);

}  // namespace jhgp
