#include "pcsc/errors.hpp"

namespace pcsc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::StarViolated: return "StarViolated";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::JacobianSingular: return "JacobianSingular";
    case ErrorCode::NoNegativePart: return "NoNegativePart";
    case ErrorCode::WrongSignClass: return "WrongSignClass";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::MaxIters: return "MaxIters";
    case ErrorCode::BisectionFailed: return "BisectionFailed";
    case ErrorCode::LineSearchFailed: return "LineSearchFailed";
    case ErrorCode::NonNegativeMultiplier: return "NonNegativeMultiplier";
    case ErrorCode::UnresolvedMode: return "UnresolvedMode";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace pcsc
