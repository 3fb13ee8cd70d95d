#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace errest {

/// Operand dimensions do not conform.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf where a finite value is required, or an arithmetic overflow.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed Matrix Market input. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A Krylov recurrence hit a zero divisor without having converged.
class BreakdownError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace errest
