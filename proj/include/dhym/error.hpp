#pragma once

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dhym {

enum class ErrorCode {
  NonPositiveMetric,
  NonHermitian,
  DimensionMismatch,
  NotInBranch,
  VanishingIntegral,
  NoLift,
  TooFewSamples,
  InconsistentClass,
  SubsolutionViolated,
  BranchExit,
  StructuralFailure,
  NotConverged,
  SliceExitsH,
  NotCauchy,
  NonKaehler,
  AngleUndefined,
  WrongDimension,
  MissingResolutionData,
  DeltaTooLarge,
  NotConvex,
  SingularHessian,
  DimensionUnsupported,
  UnsupportedGeometry,
  ParseError,
  IoError,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveMetric: return "NonPositiveMetric";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotInBranch: return "NotInBranch";
    case ErrorCode::VanishingIntegral: return "VanishingIntegral";
    case ErrorCode::NoLift: return "NoLift";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::InconsistentClass: return "InconsistentClass";
    case ErrorCode::SubsolutionViolated: return "SubsolutionViolated";
    case ErrorCode::BranchExit: return "BranchExit";
    case ErrorCode::StructuralFailure: return "StructuralFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::SliceExitsH: return "SliceExitsH";
    case ErrorCode::NotCauchy: return "NotCauchy";
    case ErrorCode::NonKaehler: return "NonKaehler";
    case ErrorCode::AngleUndefined: return "AngleUndefined";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::MissingResolutionData: return "MissingResolutionData";
    case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorCode::NotConvex: return "NotConvex";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::UnsupportedGeometry: return "UnsupportedGeometry";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// drops a leading "Code: " so that wrapped messages do not repeat it
inline std::string strip_code(const std::string& msg) {
  auto colon = msg.find(": ");
  if (colon == std::string::npos || colon == 0) return msg;
  for (size_t k = 0; k < colon; ++k)
    if (!std::isalpha(static_cast<unsigned char>(msg[k]))) return msg;
  return msg.substr(colon + 2);
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dhym
