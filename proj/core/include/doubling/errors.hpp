#pragma once

#include <stdexcept>
#include <string>

namespace doubling {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed polynomial text or structured input.
struct ParseError : Error {
    using Error::Error;
};

// A documented precondition does not hold.
struct DomainError : Error {
    using Error::Error;
};

// Numerical construction failed (Newton divergence, degenerate frame, ...).
struct NumericalError : Error {
    using Error::Error;
};

struct BudgetExceeded : Error {
    using Error::Error;
};

// A query point is not covered, or two points are not joinable.
struct NotCovered : Error {
    using Error::Error;
};

struct Disconnected : Error {
    using Error::Error;
};

}  // namespace doubling
