#pragma once

#include <stdexcept>
#include <string>

namespace trapsim {

// Invalid user-supplied parameters or config files.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mathematically out-of-domain request (valid syntax, no defined answer).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver failure, overflow guard, or loss of a numerical guarantee.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller broke a documented precondition (programming error, not input error).
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace trapsim
