#pragma once

#include <stdexcept>
#include <string>

namespace abvar {

/// Input violates a named invariant. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string invariant, const std::string& detail)
      : std::invalid_argument(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

private:
  std::string invariant_;
};

/// Numerical breakdown or an internal consistency check that failed.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace abvar
