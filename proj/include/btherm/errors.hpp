#pragma once

#include <stdexcept>
#include <string>

namespace btherm {

/// Invalid user-facing configuration (prior bounds, protocol sizes, config file contents).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bayes update whose evidence underflowed; the outcome is essentially impossible under the prior.
class DegenerateUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace btherm
