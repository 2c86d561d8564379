#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpolylab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text; `offset` is the 0-based character position.
class SyntaxError : public Error {
  public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

/// Violated precondition (bad parameter ranges, division by a non-rational, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Integer or radicand out of representable range.
class RangeError : public Error {
  public:
    using Error::Error;
};

/// Interval refinement hit the precision cap without separating a sign.
class PrecisionCapExceeded : public Error {
  public:
    using Error::Error;
};

/// A bracket could not be decided because a tie could not be excluded.
class TieUndecidable : public Error {
  public:
    using Error::Error;
};

/// Expression outside the implemented rewrite fragment.
class UnsupportedPattern : public Error {
  public:
    using Error::Error;
};

/// Shift is not good w.r.t. the polynomial (some fractional part equals 1/2).
class NotGood : public Error {
  public:
    using Error::Error;
};

/// Shift magnitude too small for the derivative or the >> assertions.
class ShiftTooSmall : public Error {
  public:
    using Error::Error;
};

/// A configured enumeration budget was exceeded.
class BudgetExceeded : public Error {
  public:
    using Error::Error;
};

}  // namespace gpolylab
