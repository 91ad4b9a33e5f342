#pragma once

#include <stdexcept>
#include <string>

namespace ppktp {

/// Input outside the range where a model is defined (e.g. a wavelength
/// outside a Sellmeier fit range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No phase-matched solution exists for the requested configuration.
class NoPhaseMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solution exists only outside the near-collinear regime the model covers.
class ApproximationViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method failed to converge.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, coefficient or measurement input. `line` is
/// 1-based when known, 0 otherwise.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what, int line = 0)
      : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace ppktp
