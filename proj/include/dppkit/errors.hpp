#ifndef DPPKIT_ERRORS_HPP
#define DPPKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dppkit {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input failed a validation check (shape, tolerance, range, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

class NotSymmetricError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NotPsdError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// All dual eigenvalues fell below the rank-truncation threshold.
class DegenerateRankError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class IndexOutOfRangeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Requested fixed size exceeds the rank of the dual kernel.
class RankMismatchError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Exhaustive enumeration refused (ground set above the bitmask cap).
class TooLargeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// A draw landed on a subset the exact distribution gives probability zero.
class UnsupportedSubsetError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Categorical weights sum to zero (or less).
class AllZeroError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// A grid hypothesis has zero clustering cost; sensitivity ratios are undefined.
class ZeroCostError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Kernel row sums are nonpositive; no scaling factor exists.
class DegenerateKernelError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class ZeroMarginalError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class InvalidArgumentError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// Floating-point state degraded past the point where results mean anything:
// a probability went negative beyond the clamp budget, or a normalization
// denominator collapsed. Surfaced as a typed error instead of garbage output.
class NumericalBreakdownError : public Error {
public:
  using Error::Error;
};

} // namespace dppkit

#endif
