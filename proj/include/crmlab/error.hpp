#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crmlab {

enum class ErrorKind {
  kInvalidConfig,
  kDivergence,
  kStepUnderflow,
  kUnknownChannel,
  kTooFewSamples,
  kZeroInputGain,
  kOutsideSet,
  kMissingChannel,
  kMissingTruth,
  kDegenerateFit,
  kPreconditionViolated,
  kUndersampled,
  kNoMatch,
  kAssumptionViolated,
  kUnstableGain,
  kMismatchedScenarios,
  kSingularBeta,
  kUnsupportedOrder,
  kSingularInertia,
};

std::string_view to_string(ErrorKind kind);

// All library failures surface as this exception; `kind()` lets callers (and
// the Python layer) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kDivergence: return "Divergence";
    case ErrorKind::kStepUnderflow: return "StepUnderflow";
    case ErrorKind::kUnknownChannel: return "UnknownChannel";
    case ErrorKind::kTooFewSamples: return "TooFewSamples";
    case ErrorKind::kZeroInputGain: return "ZeroInputGain";
    case ErrorKind::kOutsideSet: return "OutsideSet";
    case ErrorKind::kMissingChannel: return "MissingChannel";
    case ErrorKind::kMissingTruth: return "MissingTruth";
    case ErrorKind::kDegenerateFit: return "DegenerateFit";
    case ErrorKind::kPreconditionViolated: return "PreconditionViolated";
    case ErrorKind::kUndersampled: return "Undersampled";
    case ErrorKind::kNoMatch: return "NoMatch";
    case ErrorKind::kAssumptionViolated: return "AssumptionViolated";
    case ErrorKind::kUnstableGain: return "UnstableGain";
    case ErrorKind::kMismatchedScenarios: return "MismatchedScenarios";
    case ErrorKind::kSingularBeta: return "SingularBeta";
    case ErrorKind::kUnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::kSingularInertia: return "SingularInertia";
  }
  return "Unknown";
}

}  // namespace crmlab
