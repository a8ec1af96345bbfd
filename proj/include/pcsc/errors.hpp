#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pcsc {

enum class ErrorCode {
  InvalidArgument,
  GridMismatch,
  SingularOperator,
  NoConvergence,
  DegenerateKernel,
  WrongRegime,
  StarViolated,
  ConstantInput,
  NewtonDiverged,
  JacobianSingular,
  NoNegativePart,
  WrongSignClass,
  OrderingViolated,
  MaxIters,
  BisectionFailed,
  LineSearchFailed,
  NonNegativeMultiplier,
  UnresolvedMode,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported through this type. `value()`
/// carries the diagnostic number the failing routine had at hand (a residual,
/// the continuation parameter t, ...), when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<double> value = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::optional<double> value_;
};

}  // namespace pcsc
