#pragma once

#include <stdexcept>
#include <string>

namespace giant_swing {

// Failures of the numerics: singular matrices, quadrature that does not
// converge, integrator step-size underflow.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations on parameters and specs (bad ranges, wrong chart).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration file problems. Carries the offending line (0 if unknown) and
// the "section.key" field name when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string field = {})
      : std::runtime_error(format(message, line, field)),
        line_(line),
        field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line,
                            const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "[" + field + "] ";
    return out + message;
  }

  int line_;
  std::string field_;
};

}  // namespace giant_swing
