#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace homchain {

// Violated precondition of an operation (bad sizes, out-of-range orders, ...).
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// NaN / non-finite input where a finite number is required.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Quantity or regime that has no implementation for the given input.
class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A numerical procedure failed to bracket or converge.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input validation failure; carries every violated invariant.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed:";
    for (const auto& s : v) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

} // namespace homchain
