#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coreset {

enum class ErrorCode {
  EmptyMatrix,
  EmptyInput,
  EmptyStream,
  DimensionMismatch,
  InvalidDims,
  WrongDims,
  NotOrthonormal,
  BadEpsilon,
  KTooLarge,
  ZeroNormRow,
  ZeroDenominator,
  DegenerateStep,
  OracleInconsistency,
  NumericalBreakdown,
  ParseError,
  IoError,
  InvalidArgument,
};

/// Broad failure class, used by the command line to pick an exit code.
enum class ErrorClass { Usage, Data, Numerical };

std::string_view to_string(ErrorCode code) noexcept;
ErrorClass classify(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& context);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& context);

}  // namespace coreset
