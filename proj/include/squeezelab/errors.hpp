#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace squeezelab {

/// Finite-difference gain vanished at the operating point; the estimator
/// carries no first-order phase information there.
class ZeroGainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The chosen operating point sits on a pole of the estimator formula
/// (e.g. cot(2*phi) at phi = 0 or pi/2).
class SingularOperatingPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A stated precondition of an analytic formula does not hold for the
/// supplied inputs.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated Fock-space evolution lost more norm than the caller allows.
class TruncationOverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested exact comparison lies outside the supported oracle envelope.
class EnvelopeExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario configuration failed validation; `issues()` lists every
/// violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  explicit ConfigError(const std::string& issue)
      : ConfigError(std::vector<std::string>{issue}) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "invalid scenario configuration:";
    for (const auto& s : issues) {
      out += "\n  - " + s;
    }
    return out;
  }
  std::vector<std::string> issues_;
};

}  // namespace squeezelab
