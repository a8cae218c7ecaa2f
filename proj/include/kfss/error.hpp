#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kfss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A SystemModel or SensorCatalog that violates its construction invariants.
class InvalidModel : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class SingularNoise : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NotRecoverable : public Error {
 public:
  using Error::Error;
};

class UnboundedInput : public Error {
 public:
  using Error::Error;
};

class BudgetExceedsCatalog : public Error {
 public:
  using Error::Error;
};

class TooManySensors : public Error {
 public:
  using Error::Error;
};

class TooManySubsets : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Instance document could not be read. Carries the 1-based line of the
/// offending token (0 when unknown) and the field being decoded.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::string field)
      : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& message, std::size_t line,
                            const std::string& field) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in field '" + field + "'";
    return out + ": " + message;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace kfss
