// errors.hpp — Exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace fewmode {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments or violated preconditions (non-finite input, empty grid, ...).
struct InvalidInputError : Error {
    using Error::Error;
};

// Malformed external data (CSV / JSON); message names the offending line or field.
struct ParseError : Error {
    using Error::Error;
};

// A numeric routine failed to reach its requested accuracy.
struct NumericError : Error {
    using Error::Error;
};

// A computation would exceed a configured size cap.
struct ResourceError : Error {
    using Error::Error;
};

// Shape or rank mismatch, degenerate null space, and similar structural failures.
struct StructuralError : Error {
    using Error::Error;
};

} // namespace fewmode
