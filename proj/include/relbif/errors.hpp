#pragma once

#include <stdexcept>
#include <string>

namespace relbif {

enum class ErrorCode {
  DimensionMismatch,
  BadInput,
  NotInTorus,
  MetricDegenerate,
  LeftChart,
  GeoTolerance,
  NonFinite,
  SymmetricPoint,
  IsotropyNotInTorus,
  InZMu,
  SingularInertia,
  NewtonDiverged,
  DeltaDegenerate,
  StepFailed,
  TrivialIsotropyFailed,
  NonAbelian,
  NoGroupAction,
  UnknownSystem,
  BadParams,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BadInput: return "BadInput";
    case ErrorCode::NotInTorus: return "NotInTorus";
    case ErrorCode::MetricDegenerate: return "MetricDegenerate";
    case ErrorCode::LeftChart: return "LeftChart";
    case ErrorCode::GeoTolerance: return "GeoTolerance";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SymmetricPoint: return "SymmetricPoint";
    case ErrorCode::IsotropyNotInTorus: return "IsotropyNotInTorus";
    case ErrorCode::InZMu: return "InZMu";
    case ErrorCode::SingularInertia: return "SingularInertia";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::DeltaDegenerate: return "DeltaDegenerate";
    case ErrorCode::StepFailed: return "StepFailed";
    case ErrorCode::TrivialIsotropyFailed: return "TrivialIsotropyFailed";
    case ErrorCode::NonAbelian: return "NonAbelian";
    case ErrorCode::NoGroupAction: return "NoGroupAction";
    case ErrorCode::UnknownSystem: return "UnknownSystem";
    case ErrorCode::BadParams: return "BadParams";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }
  const char* name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace relbif
