#pragma once

#include <stdexcept>
#include <string>

namespace viewbias {

enum class ErrorCode {
    kInvalidArgument,
    kDegenerateSkeleton,
    kBehindCamera,
    kDegenerateFrame,
    kNotOrthonormal,
    kZeroQuaternion,
    kTooFewPoints,
    kEmptyScope,
    kMissingClusterModel,
    kShapeMismatch,
    kDegenerateAlignment,
    kEmptyInput,
    kDiverged,
    kParse,
    kIo,
};

const char *to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to a message without string matching.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what);
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

} // namespace viewbias
