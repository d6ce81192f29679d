#pragma once

#include <stdexcept>
#include <string>

namespace ckpe {

enum class ErrorCode {
  ZeroK,
  KIsMinusCubeRoot96,
  SpecialKDegreeMismatch,
  InconsistentTuple,
  NonAdmissible,
  NotNutAdmissible,
  NutDegenerate,
  OutOfRange,
  NonFiniteInput,
  ShapeMismatch,
  NewtonDiverged,
  NonAdmissibleTuple,
  NormalizationFailed,
  NonPositiveW,
  MeanMismatch,
  PatchTooCloseToBoundary,
  InfiniteK,
  BadConfig,
  IoError,
};

const char* error_code_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ckpe
