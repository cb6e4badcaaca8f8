#pragma once

#include <stdexcept>
#include <string>

namespace delayosc {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evaluation argument outside the representable domain of a function.
struct OutOfDomain : Error {
    using Error::Error;
};

/// Scalar argument outside the mathematical domain of a special function.
struct DomainError : Error {
    using Error::Error;
};

/// The delay representation cannot guarantee lim_{t->inf} tau(t) = inf.
struct Unbounded : Error {
    using Error::Error;
};

/// A theorem was invoked with a failing hypothesis.
struct HypothesisViolated : Error {
    using Error::Error;
};

/// The supplied history does not reach back to tau_min of the start time.
struct HistoryTooShort : Error {
    using Error::Error;
};

/// Invalid integration step (non-positive, or too large for the step map).
struct StepInvalid : Error {
    using Error::Error;
};

/// Overflow or NaN produced during integration.
struct NonFiniteValue : Error {
    using Error::Error;
};

/// Fewer than two zeros available where an oscillation measure needs them.
struct TooFewZeros : Error {
    using Error::Error;
};

/// Trajectory window too short for the requested bound check.
struct WindowTooShort : Error {
    using Error::Error;
};

/// Mutually contradictory certificate inputs (reported, never silently fixed).
struct InconsistentFeatures : Error {
    using Error::Error;
};

/// Malformed input file.
struct ParseError : Error {
    using Error::Error;
};

/// Well-formed input violating a structural invariant.
struct ValidationError : Error {
    using Error::Error;
};

} // namespace delayosc
