#pragma once

#include <stdexcept>
#include <string>

namespace diffoci {

// Base class for all library errors. The CLI maps subclasses onto exit
// codes: usage errors -> 2, degenerate inputs -> 3, numeric failures -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Usage / contract violations (exit code 2).
struct InvalidArgument : Error {
  using Error::Error;
};
struct MissingColumn : Error {
  using Error::Error;
};
struct NonNumericColumn : Error {
  using Error::Error;
};

// Degenerate inputs (exit code 3).
struct InsufficientSamples : Error {
  using Error::Error;
};
struct DegenerateResponse : Error {
  using Error::Error;
};
struct DegenerateDenominator : Error {
  using Error::Error;
};
struct EmptyAfterFiltering : Error {
  using Error::Error;
};

// Numeric failures (exit code 4).
struct NumericalError : Error {
  using Error::Error;
};
struct DoubleBackward : Error {
  using Error::Error;
};
struct NonScalarLoss : Error {
  using Error::Error;
};

}  // namespace diffoci
