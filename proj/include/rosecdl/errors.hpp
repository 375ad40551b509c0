#pragma once

#include <stdexcept>
#include <string>

namespace rosecdl {

// Shape disagreement between tensors that must be paired.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Index or extent outside the tensor it addresses.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// NaN/Inf produced by an iterative routine (usually a step size too large).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain where a closed-form expression holds.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rosecdl
