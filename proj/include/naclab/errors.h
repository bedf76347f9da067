#pragma once

#include <stdexcept>
#include <string>

namespace naclab {

/// A documented precondition of an operation was violated by its inputs.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy result
/// (singular Gramian, pole on the evaluation point, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario text could not be parsed. Carries the offending line and field.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, std::string field, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", field '" +
                           field + "': " + what),
        line_(line),
        field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

}  // namespace naclab
