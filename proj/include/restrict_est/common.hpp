#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace restrict_est {

/// Location models use D = X2 - X1; scale models use D = X2 / X1.
enum class Orientation { location, scale };

/// Which of the two ordered parameters (theta1 <= theta2) is being estimated.
enum class Component { first = 1, second = 2 };

/// Monotonicity of a ratio or function over a grid.
enum class Direction { non_decreasing, non_increasing, indeterminate };

using Rng = std::mt19937_64;

inline int index_of(Component c) { return static_cast<int>(c); }
Component component_from_int(int i);

std::string_view to_string(Orientation o);
std::string_view to_string(Direction d);
Direction opposite(Direction d);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: parameters, configuration, plans, data files. CLI exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure inside a numeric routine. CLI exit code 2.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Conditioning on a point where the marginal density vanishes.
class ConditioningError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace restrict_est
