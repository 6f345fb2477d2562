#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "jhgp/data_model.hpp"

namespace jhgp {

enum class KernelFamily { SquaredExponential, AR1, BrownianMotion, Sum };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& name);

/// Covariance-function family plus its hyperparameters.
///
///  * SquaredExponential: hyper = {length_scale}, k = exp(-dt^2 / (2 l^2))
///  * AR1:                hyper = {rho}, rho in (-1, 0), k = rho^|dt|
///  * BrownianMotion:     no hyperparameters, k = min(s - a + 1, t - a + 1), a = anchor
///  * Sum:                parts[0] + parts[1]; hyper is the concatenation of the parts'
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  std::vector<double> hyper;
  double jitter = 0.0;
  Tick anchor = 1;  // Brownian-motion origin; the first tick gets unit variance
  std::vector<KernelSpec> parts;

  static KernelSpec squared_exponential(double length_scale, double jitter = 0.0);
  static KernelSpec ar1(double rho, double jitter = 0.0);
  static KernelSpec brownian(Tick anchor = 1, double jitter = 0.0);
  static KernelSpec sum(KernelSpec a, KernelSpec b);

  /// Number of hyperparameters, counting through Sum parts.
  std::size_t hyper_count() const;
  /// Flattened hyperparameter vector (Sum: parts concatenated).
  std::vector<double> all_hyper() const;
  /// Replace the flattened hyperparameters.
  void set_all_hyper(const std::vector<double>& h);
  /// Throws DomainError when a hyperparameter is out of range.
  void validate() const;

  /// "family:h1,h2" text form used in run configurations, e.g. "ar1:-0.5",
  /// "se:3.0", "bm", "sum(ar1:-0.5|bm)". A trailing "@jitter" is accepted.
  std::string to_text() const;
  static KernelSpec from_text(const std::string& text);
};

/// Covariance between every tick pair of `a` x `b` (jitter is not added).
Eigen::MatrixXd realize(const KernelSpec& spec, const std::vector<Tick>& a, const std::vector<Tick>& b);

/// Square covariance on one grid, with the spec's jitter on the diagonal.
Eigen::MatrixXd realize(const KernelSpec& spec, const std::vector<Tick>& grid);

/// Elementwise derivative of the realized matrix with respect to flattened
/// hyperparameter `index`. Throws DomainError for families without one.
Eigen::MatrixXd d_realize(const KernelSpec& spec, const std::vector<Tick>& grid, std::size_t index = 0);

struct TraceTerms {
  double tr_u2 = 0.0;  // tr(U^2)
  double tr_u = 0.0;   // tr(U)
  std::size_t n = 0;
};

/// Traces of U = V^{-1} dV/dtheta via Cholesky solves.
TraceTerms whitening_trace_terms(const KernelSpec& spec, const std::vector<Tick>& grid,
                                 std::size_t index = 0);

/// AR(1) correlation rho^|s - t| for any |rho| < 1 (no sign restriction).
Eigen::MatrixXd ar1_correlation(double rho, const std::vector<Tick>& a, const std::vector<Tick>& b);

}  // namespace jhgp
