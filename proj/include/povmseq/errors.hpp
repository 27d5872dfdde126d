#pragma once

#include <stdexcept>
#include <string>

namespace povmseq {

/// Base class of every exception thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not match (non-square input, size mismatch, wrong dimension).
struct DimensionError : Error {
    using Error::Error;
};

/// Input fails a Hermiticity check.
struct NotHermitianError : Error {
    using Error::Error;
};

/// Input has an eigenvalue below the allowed negative tolerance.
struct NotPsdError : Error {
    using Error::Error;
};

/// Matrix is not a valid effect (Hermitian with spectrum in [0, 1] within tolerance).
struct NotEffectError : Error {
    using Error::Error;
};

/// Iterative eigensolver exhausted its sweep budget.
struct ConvergenceError : Error {
    using Error::Error;
};

/// Partition or cell is malformed (empty cell, overlap, out-of-range index).
struct PartitionError : Error {
    using Error::Error;
};

/// Measurement tree cannot be built (fewer than two outcomes, bad order).
struct TreeError : Error {
    using Error::Error;
};

/// Scalar parameter outside its admissible range.
struct DomainError : Error {
    using Error::Error;
};

/// Input document could not be parsed or has the wrong schema.
struct ParseError : Error {
    using Error::Error;
};

} // namespace povmseq
