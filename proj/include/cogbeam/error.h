#ifndef COGBEAM_ERROR_H_
#define COGBEAM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cogbeam {

enum class ErrorCode {
  kNotPsd,
  kConvergenceFailure,
  kInvalidConfig,
  kUnknownPreset,
  kSingularSystem,
  kMissingReceiver,
  kMissingTrueChannel,
  kInconsistentSpec,
  kNumericalBreakdown,
  kCertificateFailure,
  kSolverFailure,
  kShapeMismatch,
  kParseError,
  kUnknownKey,
  kRangeError,
  kEmptyInput,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cogbeam

#endif  // COGBEAM_ERROR_H_
