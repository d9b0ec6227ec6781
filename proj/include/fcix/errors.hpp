#pragma once

#include <stdexcept>
#include <string>

namespace fcix {

/// Base class for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numeric routine could not complete (non-convergence, singularity,
/// overflow risk).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside an operation's documented domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

#define FCIX_ERROR(NAME, BASE) \
  class NAME : public BASE {   \
   public:                     \
    using BASE::BASE;          \
  };

// panel
FCIX_ERROR(NonPositivePrice, DataError)
FCIX_ERROR(IncompletePanel, DataError)
FCIX_ERROR(EmptyPanel, DataError)
FCIX_ERROR(ParseError, DataError)
FCIX_ERROR(LagTooLarge, DataError)

// rpcm
FCIX_ERROR(NonPositiveEntry, DataError)
FCIX_ERROR(NonPositiveWeight, DataError)
FCIX_ERROR(NoConvergence, NumericError)
FCIX_ERROR(DegenerateOrder, InvalidParameter)
FCIX_ERROR(OrderCapExceeded, InvalidParameter)
FCIX_ERROR(DerivativeNearZero, NumericError)
FCIX_ERROR(OverflowRisk, NumericError)

// rpct
FCIX_ERROR(DegenerateFactor, NumericError)
FCIX_ERROR(IndexOutOfRange, InvalidParameter)

// segment
FCIX_ERROR(EmptySegment, InvalidParameter)
FCIX_ERROR(InfeasiblePartition, DataError)

// entropy
FCIX_ERROR(SeriesTooShort, DataError)
FCIX_ERROR(NonPositiveTolerance, InvalidParameter)
FCIX_ERROR(DegenerateSeries, DataError)
FCIX_ERROR(LengthMismatch, DataError)

// fracts
FCIX_ERROR(OptimizationFailure, NumericError)
FCIX_ERROR(SingularDesign, NumericError)

// dynamics
FCIX_ERROR(DegenerateParameters, InvalidParameter)
FCIX_ERROR(Blowup, NumericError)

// cli
FCIX_ERROR(MisalignedSeries, DataError)

#undef FCIX_ERROR

}  // namespace fcix
