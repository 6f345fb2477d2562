#pragma once

#include <stdexcept>
#include <string>

namespace jhgp {

// Malformed input data (CSV rows, subject records). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cholesky failure after jitter escalation, or a sampler block that produced
// non-finite values. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter outside its admissible domain (rho, length-scale, scale > 0, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad configuration or command-line usage. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jhgp
