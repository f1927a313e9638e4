#pragma once

#include <stdexcept>
#include <string>

namespace twophoton {

/// Argument outside the mathematical domain of an operation (nonpositive
/// wavelength, zero bandwidth, window exactly on the regime boundary, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (e.g. unsorted event stream).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inconsistent or physically impossible configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Visibility fit failed to converge; the message carries residual diagnostics.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal numerical guard tripped (sampler cap, quadrature mismatch).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace twophoton
