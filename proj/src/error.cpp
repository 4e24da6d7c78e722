#include "coreset/error.hpp"

namespace coreset {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::WrongDims: return "WrongDims";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::DegenerateStep: return "DegenerateStep";
    case ErrorCode::OracleInconsistency: return "OracleInconsistency";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadEpsilon:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidDims:
      return ErrorClass::Usage;
    case ErrorCode::ZeroDenominator:
    case ErrorCode::DegenerateStep:
    case ErrorCode::OracleInconsistency:
    case ErrorCode::NumericalBreakdown:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Data;
  }
}

Error::Error(ErrorCode code, const std::string& context)
    : std::runtime_error(std::string(to_string(code)) + ": " + context), code_(code) {}

void fail(ErrorCode code, const std::string& context) { throw Error(code, context); }

}  // namespace coreset
