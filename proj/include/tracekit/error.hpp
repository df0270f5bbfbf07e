#pragma once

#include <stdexcept>
#include <string>

namespace tracekit {

/// An argument lies outside the mathematical domain of an operation
/// (e.g. a weight power outside the admissible window).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature produced a non-finite sample or intermediate value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A verification instance reported FAIL. Carries the serialized report.
class CheckFailed : public std::runtime_error {
 public:
  explicit CheckFailed(std::string report_json)
      : std::runtime_error("check failed: " + report_json), report_(std::move(report_json)) {}

  const std::string& report() const noexcept { return report_; }

 private:
  std::string report_;
};

}  // namespace tracekit
