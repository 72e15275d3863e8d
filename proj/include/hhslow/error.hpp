#pragma once

#include <concepts>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace hhslow {

/// Compact rendering of numbers for error messages.
inline std::string show(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
inline std::string show(std::integral auto x) { return std::to_string(x); }

/// Broad failure classes; each maps onto one CLI exit code.
enum class ErrorKind {
  validation = 2,       ///< bad input, domain violation
  numeric_quality = 3,  ///< energy drift, lost section crossing, branch jump
  io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Short machine-readable tag, e.g. "drift_exceeded".
  const std::string& code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string code_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string code, const std::string& what)
      : Error(ErrorKind::validation, std::move(code), what) {}
};

/// Square root of a negative quantity or similar out-of-domain argument.
class DomainError : public ValidationError {
 public:
  explicit DomainError(const std::string& what) : ValidationError("domain", what) {}
};

class NumericQualityError : public Error {
 public:
  NumericQualityError(std::string code, const std::string& what)
      : Error(ErrorKind::numeric_quality, std::move(code), what) {}
};

class DriftError : public NumericQualityError {
 public:
  DriftError(double time, double drift, const std::string& what)
      : NumericQualityError("drift_exceeded", what), time_(time), drift_(drift) {}

  /// Time at which the tolerance was first violated.
  double time() const noexcept { return time_; }
  double drift() const noexcept { return drift_; }

 private:
  double time_;
  double drift_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, "io", what) {}
};

}  // namespace hhslow
