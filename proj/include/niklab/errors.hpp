#pragma once

#include <stdexcept>
#include <string>

namespace niklab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : Error { using Error::Error; };
struct PointOnSupport : Error { using Error::Error; };
struct OverlappingSupports : Error { using Error::Error; };
struct SingularInversion : Error { using Error::Error; };
struct IndefiniteHankel : Error { using Error::Error; };
struct SignChangeDetected : Error { using Error::Error; };
struct AdjacentOverlap : Error { using Error::Error; };
struct NullspaceTooLarge : Error { using Error::Error; };
struct IllConditioned : Error { using Error::Error; };
struct NotNormal : Error { using Error::Error; };
struct ZeroLeadingCoefficient : Error { using Error::Error; };
struct ZeroCountMismatch : Error { using Error::Error; };
struct ContourThroughZero : Error { using Error::Error; };
struct ConstantMismatch : Error { using Error::Error; };
struct PreconditionViolated : Error { using Error::Error; };
struct DerivateConstructionFailed : Error { using Error::Error; };
struct BadProbabilityVector : Error { using Error::Error; };
struct IndefiniteInteraction : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct InputError : Error { using Error::Error; };

// Raised when a numerical experiment contradicts one of the claims the suite
// is built to check; `claim` names the statement (e.g. "Theorem 2").
struct AssertionFailure : Error {
    std::string claim;
    AssertionFailure(std::string claim_, const std::string& what_)
        : Error(claim_ + ": " + what_), claim(std::move(claim_)) {}
};

} // namespace niklab
