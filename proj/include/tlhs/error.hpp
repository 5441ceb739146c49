#pragma once

#include <stdexcept>
#include <string>

namespace tlhs {

enum class ErrorCode {
  kInvalidArgument = 1,
  kZeroVector,
  kDimensionMismatch,
  kSizeLimit,
  kEmptyDataset,
  kNonPositiveStep,
  kOddK,
  kInsufficientBandSamples,
  kThetaOutOfRange,
  kNotSymmetric,
  kNoConvergence,
  kEmptyCandidateList,
  kModeMismatch,
  kWrongDimension,
  kIo,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace tlhs
