#pragma once

#include <stdexcept>
#include <string>

namespace toric {

enum class ErrorCode {
  NonPrimitiveRay,
  NotSimplicial,
  FaceConditionViolated,
  DuplicateRay,
  ConeNotInFan,
  ConeImageNotContained,
  RequiresSmooth,
  RequiresComplete,
  RequiresSmoothComplete,
  NonFullDimensionalCone,
  DNotEffective,
  FanMismatch,
  NotDecreasing,
  IncompatibleOnCone,
  RestrictionInconsistent,
  NotCertifiedSplit,
  EigenvaluesNotDistinct,
  IrrationalEigenvalues,
  SblocNotStabilized,
  CdUnavailable,
  RequiresNef,
  UnknownRule,
  MissingContext,
  FactorTooSmall,
  UnknownCatalogEntry,
  ParseError,
  ValidationError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPrimitiveRay: return "NonPrimitiveRay";
    case ErrorCode::NotSimplicial: return "NotSimplicial";
    case ErrorCode::FaceConditionViolated: return "FaceConditionViolated";
    case ErrorCode::DuplicateRay: return "DuplicateRay";
    case ErrorCode::ConeNotInFan: return "ConeNotInFan";
    case ErrorCode::ConeImageNotContained: return "ConeImageNotContained";
    case ErrorCode::RequiresSmooth: return "RequiresSmooth";
    case ErrorCode::RequiresComplete: return "RequiresComplete";
    case ErrorCode::RequiresSmoothComplete: return "RequiresSmoothComplete";
    case ErrorCode::NonFullDimensionalCone: return "NonFullDimensionalCone";
    case ErrorCode::DNotEffective: return "DNotEffective";
    case ErrorCode::FanMismatch: return "FanMismatch";
    case ErrorCode::NotDecreasing: return "NotDecreasing";
    case ErrorCode::IncompatibleOnCone: return "IncompatibleOnCone";
    case ErrorCode::RestrictionInconsistent: return "RestrictionInconsistent";
    case ErrorCode::NotCertifiedSplit: return "NotCertifiedSplit";
    case ErrorCode::EigenvaluesNotDistinct: return "EigenvaluesNotDistinct";
    case ErrorCode::IrrationalEigenvalues: return "IrrationalEigenvalues";
    case ErrorCode::SblocNotStabilized: return "SblocNotStabilized";
    case ErrorCode::CdUnavailable: return "CdUnavailable";
    case ErrorCode::RequiresNef: return "RequiresNef";
    case ErrorCode::UnknownRule: return "UnknownRule";
    case ErrorCode::MissingContext: return "MissingContext";
    case ErrorCode::FactorTooSmall: return "FactorTooSmall";
    case ErrorCode::UnknownCatalogEntry: return "UnknownCatalogEntry";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace toric
