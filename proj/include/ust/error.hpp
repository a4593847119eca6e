#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ust {

// Bad shapes, out-of-range parameters, malformed masks.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs that are well-formed but carry no usable statistics
// (e.g. a constant style image has a rank-0 covariance).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  // Off-diagonal Frobenius norm at the point the solver gave up.
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// Network specs or weights that do not fit together.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ust
