#include "cogbeam/error.h"

namespace cogbeam {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPsd: return "NotPSD";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnknownPreset: return "UnknownPreset";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kMissingReceiver: return "MissingReceiver";
    case ErrorCode::kMissingTrueChannel: return "MissingTrueChannel";
    case ErrorCode::kInconsistentSpec: return "InconsistentSpec";
    case ErrorCode::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::kCertificateFailure: return "CertificateFailure";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownKey: return "UnknownKey";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace cogbeam
