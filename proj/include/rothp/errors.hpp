#pragma once

#include <stdexcept>
#include <string>

namespace rothp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or dimension disagreement between operands.
struct DimensionError : Error {
  using Error::Error;
};

// Malformed input data (sequences, datasets, marks out of range).
struct DataError : Error {
  using Error::Error;
};

// Invalid configuration or parameter value (e.g. beta <= 0).
struct ParameterError : Error {
  using Error::Error;
};

// Interval bounds out of order or a point outside its interval.
struct IntervalError : Error {
  using Error::Error;
};

// Hawkes parameters fail the stationarity check.
struct StabilityError : Error {
  using Error::Error;
};

// Unreadable, truncated, or shape-mismatched checkpoint file.
struct CheckpointError : Error {
  using Error::Error;
};

// Non-finite loss encountered during training or gradient probing.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace rothp
