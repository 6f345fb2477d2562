#include "jhgp/gp_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "jhgp/errors.hpp"

namespace jhgp {

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& a, double* jitter_out) {
  if (a.rows() != a.cols()) throw DomainError("cholesky of a non-square matrix");
  if (!a.allFinite()) throw NumericalError("cholesky: matrix has non-finite entries");
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd work = a;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) {
      if (jitter_out != nullptr) *jitter_out = jitter;
      return llt.matrixL();
    }
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-6 * 1.0000001) {
      throw NumericalError("cholesky failed after jitter escalation to 1e-6 (order " +
                           std::to_string(a.rows()) + ")");
    }
  }
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

const Eigen::MatrixXd& CovMatrix::cholesky() const {
  if (!factored_) {
    l_ = robust_cholesky(m_, &jitter_);
    factored_ = true;
  }
  return l_;
}

Eigen::MatrixXd CovMatrix::solve(const Eigen::MatrixXd& b) const {
  const auto& l = cholesky();
  const auto tri = l.triangularView<Eigen::Lower>();
  return tri.transpose().solve(tri.solve(b));
}

double CovMatrix::log_det() const {
  return 2.0 * cholesky().diagonal().array().log().sum();
}

double mvn_logpdf(const Eigen::VectorXd& x, const GaussianDist& dist) {
  if (x.size() != dist.mean.size() || dist.mean.size() != dist.cov.size()) {
    throw DomainError("mvn_logpdf: dimension mismatch");
  }
  const auto& l = dist.cov.cholesky();
  const Eigen::VectorXd z = l.triangularView<Eigen::Lower>().solve(x - dist.mean);
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + dist.cov.log_det() + z.squaredNorm());
}

Eigen::VectorXd mvn_sample(const GaussianDist& dist, Rng& rng) {
  const auto& l = dist.cov.cholesky();
  Eigen::VectorXd z(dist.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return dist.mean + l.triangularView<Eigen::Lower>() * z;
}

GaussianDist gp_posterior(const Eigen::VectorXd& prior_mean, const CovMatrix& prior_cov,
                          const Eigen::VectorXd& y, double noise_var) {
  const auto n = prior_mean.size();
  if (y.size() != n || prior_cov.size() != n) throw DomainError("gp_posterior: dimension mismatch");
  if (!(noise_var >= 0.0)) throw DomainError("gp_posterior: noise variance must be >= 0");
  const Eigen::MatrixXd& sigma = prior_cov.matrix();
  Eigen::MatrixXd a = sigma;
  a.diagonal().array() += noise_var;
  const CovMatrix outer(std::move(a));
  const Eigen::MatrixXd gain = outer.solve(sigma);  // (S + s2 I)^-1 S, transposed gain
  GaussianDist post;
  post.mean = prior_mean + gain.transpose() * (y - prior_mean);
  post.cov = CovMatrix(symmetrize(sigma - sigma * gain));
  return post;
}

GaussianDist krige(const Eigen::VectorXd& prior_mean_t, const Eigen::VectorXd& prior_mean_s,
                   const CovMatrix& cov_tt, const CovMatrix& cov_ss, const Eigen::MatrixXd& cov_st,
                   const Eigen::VectorXd& y_t, double noise_var) {
  const auto nt = prior_mean_t.size();
  const auto ns = prior_mean_s.size();
  if (cov_st.rows() != ns || cov_st.cols() != nt || cov_tt.size() != nt || cov_ss.size() != ns ||
      y_t.size() != nt) {
    throw DomainError("krige: shape mismatch");
  }
  if (!(noise_var >= 0.0)) throw DomainError("krige: noise variance must be >= 0");
  Eigen::MatrixXd a = cov_tt.matrix();
  a.diagonal().array() += noise_var;
  const CovMatrix outer(std::move(a));
  const Eigen::MatrixXd w = outer.solve(cov_st.transpose());  // |t| x |s|
  GaussianDist pred;
  pred.mean = prior_mean_s + w.transpose() * (y_t - prior_mean_t);
  pred.cov = CovMatrix(symmetrize(cov_ss.matrix() - cov_st * w));
  return pred;
}

GaussianConditional gaussian_conditional(const Eigen::MatrixXd& prior_cov,
                                         const Eigen::VectorXd& precision,
                                         const Eigen::VectorXd& linear) {
  const auto n = prior_cov.rows();
  if (precision.size() != n || linear.size() != n) {
    throw DomainError("gaussian_conditional: dimension mismatch");
  }
  if ((precision.array() < 0.0).any()) throw DomainError("gaussian_conditional: negative precision");
  const Eigen::VectorXd s = precision.array().sqrt();
  Eigen::MatrixXd b = s.asDiagonal() * prior_cov * s.asDiagonal();
  b.diagonal().array() += 1.0;
  const Eigen::MatrixXd lb = robust_cholesky(symmetrize(b));
  const auto tri = lb.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd w = tri.solve(s.asDiagonal() * prior_cov);  // L_B^-1 S K
  const Eigen::VectorXd kb = prior_cov * linear;
  GaussianConditional out;
  out.mean = kb - w.transpose() * tri.solve(s.cwiseProduct(kb));
  out.cov = symmetrize(prior_cov - w.transpose() * w);
  return out;
}

Eigen::VectorXd sample_gaussian_conditional(const Eigen::MatrixXd& prior_cov,
                                            const Eigen::VectorXd& precision,
                                            const Eigen::VectorXd& linear, Rng& rng) {
  const auto c = gaussian_conditional(prior_cov, precision, linear);
  const Eigen::MatrixXd l = robust_cholesky(c.cov);
  Eigen::VectorXd z(c.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return c.mean + l.triangularView<Eigen::Lower>() * z;
}

}  // namespace jhgp
