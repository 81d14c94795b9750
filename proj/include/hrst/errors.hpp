#pragma once

#include <stdexcept>
#include <string>

namespace hrst {

// Preconditions on user-supplied parameters are reported with
// std::invalid_argument. The types below cover the remaining failure classes,
// each of which maps to a distinct CLI exit code.

/// An expected point count or sample budget exceeded its configured cap.
class ResourceCapError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical construction could not be verified (uncovered direction,
/// unreliable censored estimate, ...).
class VerificationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input that violates an almost-sure genericity assumption, such as two
/// coincident Poisson points.
class DegenerateInputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace hrst
