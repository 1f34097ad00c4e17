#pragma once

#include <stdexcept>
#include <string>

namespace fairflip {

class Error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inputs outside an operation's domain (bad tape, unknown protocol name,
/// unreachable prefix, rho outside (0,1), ...).
class DomainError : public Error {
    using Error::Error;
};

/// Instance too large for the requested mode (enumeration budget exceeded,
/// exact arithmetic overflow, sample count out of integer range).
class CapacityError : public Error {
    using Error::Error;
};

/// Malformed input file in the report tooling.
class ParseError : public Error {
    using Error::Error;
};

} // namespace fairflip
