#pragma once

#include <stdexcept>
#include <string>

namespace hybridlink {

/// Input that violates a documented invariant (config values, bounds, units).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Query outside the sampled range of a table.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Solver or quadrature failure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hybridlink
