#pragma once

#include <stdexcept>
#include <string>

namespace abcwb {

// Input violates an operation's precondition (bad range, non-coprime pair,
// composite modulus where a prime is required, malformed file ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation that must not see partial factorizations was handed one.
class UncertainFactorization : public ValidationError {
 public:
  UncertainFactorization()
      : ValidationError("factorization is not certain (unfactored cofactor remains)") {}
};

// P = Q or P = -Q where a chord through two distinct points is required.
class DegenerateCase : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace abcwb
