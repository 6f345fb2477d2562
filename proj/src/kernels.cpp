#include "jhgp/kernels.hpp"

#include <cmath>
#include <sstream>

#include "jhgp/data_model.hpp"
#include "jhgp/errors.hpp"
#include "jhgp/gp_core.hpp"

namespace jhgp {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::SquaredExponential: return "se";
    case KernelFamily::AR1: return "ar1";
    case KernelFamily::BrownianMotion: return "bm";
    case KernelFamily::Sum: return "sum";
  }
  return "?";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "se" || name == "squared_exponential") return KernelFamily::SquaredExponential;
  if (name == "ar1") return KernelFamily::AR1;
  if (name == "bm" || name == "brownian") return KernelFamily::BrownianMotion;
  if (name == "sum") return KernelFamily::Sum;
  throw UsageError("unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::squared_exponential(double length_scale, double jitter) {
  KernelSpec k;
  k.family = KernelFamily::SquaredExponential;
  k.hyper = {length_scale};
  k.jitter = jitter;
  k.validate();
  return k;
}

KernelSpec KernelSpec::ar1(double rho, double jitter) {
  KernelSpec k;
  k.family = KernelFamily::AR1;
  k.hyper = {rho};
  k.jitter = jitter;
  k.validate();
  return k;
}

KernelSpec KernelSpec::brownian(Tick anchor, double jitter) {
  KernelSpec k;
  k.family = KernelFamily::BrownianMotion;
  k.anchor = anchor;
  k.jitter = jitter;
  return k;
}

KernelSpec KernelSpec::sum(KernelSpec a, KernelSpec b) {
  KernelSpec k;
  k.family = KernelFamily::Sum;
  k.jitter = a.jitter + b.jitter;
  a.jitter = 0.0;
  b.jitter = 0.0;
  k.parts = {std::move(a), std::move(b)};
  return k;
}

std::size_t KernelSpec::hyper_count() const {
  if (family == KernelFamily::Sum) return parts.at(0).hyper_count() + parts.at(1).hyper_count();
  return hyper.size();
}

std::vector<double> KernelSpec::all_hyper() const {
  if (family != KernelFamily::Sum) return hyper;
  auto h = parts.at(0).all_hyper();
  auto h2 = parts.at(1).all_hyper();
  h.insert(h.end(), h2.begin(), h2.end());
  return h;
}

void KernelSpec::set_all_hyper(const std::vector<double>& h) {
  if (h.size() != hyper_count()) throw DomainError("hyperparameter count mismatch");
  if (family != KernelFamily::Sum) {
    hyper = h;
    return;
  }
  const auto n0 = parts[0].hyper_count();
  parts[0].set_all_hyper(std::vector<double>(h.begin(), h.begin() + static_cast<long>(n0)));
  parts[1].set_all_hyper(std::vector<double>(h.begin() + static_cast<long>(n0), h.end()));
}

void KernelSpec::validate() const {
  if (!(jitter >= 0.0)) throw DomainError("kernel jitter must be >= 0");
  switch (family) {
    case KernelFamily::SquaredExponential:
      if (hyper.size() != 1) throw DomainError("squared exponential needs one length-scale");
      if (!(hyper[0] > 0.0) || !std::isfinite(hyper[0])) {
        throw DomainError("length-scale must be > 0, got " + format_double(hyper[0]));
      }
      break;
    case KernelFamily::AR1:
      if (hyper.size() != 1) throw DomainError("AR(1) needs one correlation parameter");
      if (!(hyper[0] > -1.0 && hyper[0] < 0.0)) {
        throw DomainError("AR(1) rho must lie in (-1, 0), got " + format_double(hyper[0]));
      }
      break;
    case KernelFamily::BrownianMotion:
      if (!hyper.empty()) throw DomainError("Brownian motion takes no hyperparameters");
      break;
    case KernelFamily::Sum:
      if (parts.size() != 2) throw DomainError("sum kernel needs exactly two parts");
      parts[0].validate();
      parts[1].validate();
      break;
  }
}

std::string KernelSpec::to_text() const {
  std::ostringstream os;
  if (family == KernelFamily::Sum) {
    os << "sum(" << parts.at(0).to_text() << '|' << parts.at(1).to_text() << ')';
  } else {
    os << to_string(family);
    for (std::size_t i = 0; i < hyper.size(); ++i) os << (i == 0 ? ':' : ',') << format_double(hyper[i]);
  }
  if (jitter > 0.0) os << '@' << format_double(jitter);
  return os.str();
}

KernelSpec KernelSpec::from_text(const std::string& text_in) {
  std::string text = text_in;
  double jitter = 0.0;
  const auto at = text.rfind('@');
  if (at != std::string::npos && text.find(')', at) == std::string::npos) {
    jitter = std::stod(text.substr(at + 1));
    text.resize(at);
  }
  KernelSpec k;
  if (text.rfind("sum(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(4, text.size() - 5);
    int depth = 0;
    std::size_t split = std::string::npos;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      if (inner[i] == ')') --depth;
      if (inner[i] == '|' && depth == 0) {
        split = i;
        break;
      }
    }
    if (split == std::string::npos) throw UsageError("malformed sum kernel '" + text_in + "'");
    k = sum(from_text(inner.substr(0, split)), from_text(inner.substr(split + 1)));
  } else {
    const auto colon = text.find(':');
    k.family = kernel_family_from_string(text.substr(0, colon));
    if (colon != std::string::npos) {
      std::stringstream ss(text.substr(colon + 1));
      std::string item;
      while (std::getline(ss, item, ',')) k.hyper.push_back(std::stod(item));
    }
  }
  k.jitter += jitter;
  k.validate();
  return k;
}

namespace {

double kernel_value(const KernelSpec& spec, Tick s, Tick t) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential: {
      const double d = static_cast<double>(s - t);
      const double l = spec.hyper[0];
      return std::exp(-d * d / (2.0 * l * l));
    }
    case KernelFamily::AR1:
      return std::pow(spec.hyper[0], static_cast<double>(std::llabs(s - t)));
    case KernelFamily::BrownianMotion: {
      const Tick a = s - spec.anchor + 1;
      const Tick b = t - spec.anchor + 1;
      if (a <= 0 || b <= 0) {
        throw DomainError("Brownian-motion kernel evaluated before its anchor tick " +
                          std::to_string(spec.anchor));
      }
      return static_cast<double>(std::min(a, b));
    }
    case KernelFamily::Sum:
      return kernel_value(spec.parts[0], s, t) + kernel_value(spec.parts[1], s, t);
  }
  return 0.0;
}

double kernel_derivative(const KernelSpec& spec, Tick s, Tick t, std::size_t index) {
  switch (spec.family) {
    case KernelFamily::SquaredExponential: {
      const double d = static_cast<double>(s - t);
      const double l = spec.hyper[0];
      return std::exp(-d * d / (2.0 * l * l)) * d * d / (l * l * l);
    }
    case KernelFamily::AR1: {
      const auto m = std::llabs(s - t);
      if (m == 0) return 0.0;
      return static_cast<double>(m) * std::pow(spec.hyper[0], static_cast<double>(m - 1));
    }
    case KernelFamily::BrownianMotion:
      throw DomainError("Brownian-motion kernel has no hyperparameter to differentiate");
    case KernelFamily::Sum: {
      const auto n0 = spec.parts[0].hyper_count();
      if (index < n0) return kernel_derivative(spec.parts[0], s, t, index);
      return kernel_derivative(spec.parts[1], s, t, index - n0);
    }
  }
  return 0.0;
}

}  // namespace

Eigen::MatrixXd realize(const KernelSpec& spec, const std::vector<Tick>& a, const std::vector<Tick>& b) {
  if (a.empty() || b.empty()) throw DomainError("realize needs non-empty grids");
  spec.validate();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel_value(spec, a[i], b[j]);
    }
  }
  return m;
}

Eigen::MatrixXd realize(const KernelSpec& spec, const std::vector<Tick>& grid) {
  Eigen::MatrixXd m = realize(spec, grid, grid);
  m.diagonal().array() += spec.jitter;
  return m;
}

Eigen::MatrixXd d_realize(const KernelSpec& spec, const std::vector<Tick>& grid, std::size_t index) {
  if (grid.empty()) throw DomainError("d_realize needs a non-empty grid");
  spec.validate();
  if (index >= spec.hyper_count()) {
    throw DomainError("kernel '" + spec.to_text() + "' has no hyperparameter #" + std::to_string(index));
  }
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = kernel_derivative(spec, grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)], index);
    }
  }
  return m;
}

TraceTerms whitening_trace_terms(const KernelSpec& spec, const std::vector<Tick>& grid, std::size_t index) {
  const CovMatrix v(realize(spec, grid));
  const Eigen::MatrixXd u = v.solve(d_realize(spec, grid, index));
  TraceTerms out;
  out.n = grid.size();
  out.tr_u = u.trace();
  out.tr_u2 = (u.array() * u.transpose().array()).sum();
  return out;
}

Eigen::MatrixXd ar1_correlation(double rho, const std::vector<Tick>& a, const std::vector<Tick>& b) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("AR(1) correlation needs |rho| < 1");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::pow(rho, static_cast<double>(std::llabs(a[i] - b[j])));
    }
  }
  return m;
}

}  // namespace jhgp
