#pragma once

#include <stdexcept>
#include <string>

namespace dblind {

/// Raised when a parameter violates a model invariant. Carries the parameter
/// name so front ends can report it.
class DomainError : public std::invalid_argument {
public:
  DomainError(std::string parameter, const std::string& message)
      : std::invalid_argument(parameter + ": " + message), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

private:
  std::string parameter_;
};

} // namespace dblind
