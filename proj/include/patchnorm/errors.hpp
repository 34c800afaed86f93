#pragma once

#include <stdexcept>
#include <string>

namespace patchnorm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or axis incompatibility between tensors / grids.
struct DimensionError : Error {
  using Error::Error;
};

// Invalid hyper-parameter or malformed configuration value.
struct ConfigError : Error {
  using Error::Error;
};

// API misuse (backward on a non-scalar, score on a single patch, ...).
struct UsageError : Error {
  using Error::Error;
};

// Malformed or unreadable artifact file.
struct IoError : Error {
  using Error::Error;
};

// Checkpoint does not match the model it is loaded into.
struct MismatchError : Error {
  using Error::Error;
};

// Training produced non-finite values.
struct DivergenceError : Error {
  using Error::Error;
};

}  // namespace patchnorm
