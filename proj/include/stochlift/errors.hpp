#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stochlift {

/// Invalid or inconsistent experiment configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not deliver its postcondition. The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No index of a residual sequence meets the stopping threshold.
class NotReached : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The discrepancy band cannot be met even as the regularization vanishes.
class NoFeasibleAlpha : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A scan found no sign change to bracket a root. `table` holds the scanned (x, f(x)) pairs.
class NoBracket : public NumericalError {
 public:
  NoBracket(const std::string& what, std::vector<std::pair<double, double>> table)
      : NumericalError(what), table_(std::move(table)) {}
  const std::vector<std::pair<double, double>>& table() const { return table_; }

 private:
  std::vector<std::pair<double, double>> table_;
};

/// Vector or matrix dimensions do not agree.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace stochlift
