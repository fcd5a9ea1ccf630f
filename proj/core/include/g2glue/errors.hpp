#pragma once

#include <stdexcept>
#include <string>

namespace g2glue {

/// Operands live on frames of different dimension, or a degree is out of range.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A metric failed the symmetric positive definite test.
class NotSpdError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A 3-form is not a G2-structure (its bilinear form is indefinite).
class NotG2Error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical routine did not reach its requested accuracy.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace g2glue
