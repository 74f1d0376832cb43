#pragma once

#include <stdexcept>
#include <string>

namespace blockcanon {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Empty partition or a non-positive block size.
struct InvalidPartition : Error {
  using Error::Error;
};

// Operand dimensions do not match the partition or each other.
struct DimensionMismatch : Error {
  using Error::Error;
};

// A dense matrix deviates from the block structure by more than the tolerance.
struct StructureViolation : Error {
  using Error::Error;
};

// The core matrix or a within-block eigenvalue is (numerically) singular.
struct SingularMatrix : Error {
  using Error::Error;
};

// No real matrix logarithm exists for the given input.
struct NotRealLoggable : Error {
  using Error::Error;
};

// Equal-block fast path invoked on a partition with differing block sizes.
struct UnequalBlocks : Error {
  using Error::Error;
};

// A data column has zero sample second moment.
struct ZeroVariance : Error {
  ZeroVariance(const std::string& msg, int col) : Error(msg), column(col) {}
  int column;
};

// Malformed input file or inconsistent user-supplied data.
struct InputError : Error {
  using Error::Error;
};

}  // namespace blockcanon
