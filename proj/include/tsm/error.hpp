#pragma once

#include <stdexcept>
#include <string>

namespace tsm {

// Base of all library errors. Callers that only care about "something went
// wrong" catch this; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed textual input (decimal literals, system descriptions, checkpoints).
class ParseError : public Error
{
public:
    using Error::Error;
};

// Exponent overflow or underflow of a multiple-precision value.
class RangeError : public Error
{
public:
    using Error::Error;
};

// Mathematically undefined operation or out-of-domain argument.
class DomainError : public Error
{
public:
    using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace tsm
