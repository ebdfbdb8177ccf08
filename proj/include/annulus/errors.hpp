#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace annulus {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by the expression parser; `offset` is the byte offset into the input.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// The evaluation point is a pole (or a zero where the logarithm is required).
class SingularPointError : public Error {
public:
    using Error::Error;
};

/// A circle index came out non-integral beyond the accepted slack.
class IntegralityError : public Error {
public:
    IntegralityError(const std::string& what, double raw)
        : Error(what), raw_(raw) {}

    double raw() const noexcept { return raw_; }

private:
    double raw_;
};

/// A zero or pole lies on a circle where the operation requires none.
class BoundaryRootError : public Error {
public:
    using Error::Error;
};

/// The requested computation is outside what the model supports
/// (e.g. blind pole search for an expression model).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace annulus
