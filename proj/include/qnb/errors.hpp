#pragma once

#include <stdexcept>
#include <string>

namespace qnb {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Shapes or preconditions of a call do not fit together.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract", what) {}
};

/// A physical or configuration parameter is outside its admissible range.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

/// Quantity requested at Omega = 0 where it has a pole.
class DcSingularError : public Error {
 public:
  explicit DcSingularError(const std::string& what) : Error("dc_singular", what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error("solver", what) {}
};

class ConditioningError : public Error {
 public:
  explicit ConditioningError(const std::string& what) : Error("conditioning", what) {}
};

/// A finite matrix was requested for an infinitely squeezed state.
class AnalyticLimitRequired : public Error {
 public:
  explicit AnalyticLimitRequired(const std::string& what)
      : Error("analytic_limit_required", what) {}
};

/// A spectral density that must be positive semidefinite is not.
class PsdViolation : public Error {
 public:
  explicit PsdViolation(const std::string& what) : Error("psd_violation", what) {}
};

/// Infinite anti-squeezed EPR noise reaches the readout uncancelled.
class DivergentNoise : public Error {
 public:
  explicit DivergentNoise(const std::string& what) : Error("divergent_noise", what) {}
};

}  // namespace qnb
