#include "viewbias/error.hpp"

namespace viewbias {

const char *to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDegenerateSkeleton: return "degenerate skeleton";
    case ErrorCode::kBehindCamera: return "point behind camera";
    case ErrorCode::kDegenerateFrame: return "degenerate body frame";
    case ErrorCode::kNotOrthonormal: return "matrix is not a rotation";
    case ErrorCode::kZeroQuaternion: return "zero quaternion";
    case ErrorCode::kTooFewPoints: return "too few distinct points";
    case ErrorCode::kEmptyScope: return "empty cluster scope";
    case ErrorCode::kMissingClusterModel: return "cluster model required";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kDegenerateAlignment: return "degenerate alignment";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kDiverged: return "training diverged";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
    }
    return "unknown error";
}

Error::Error(ErrorCode code, const std::string &what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

} // namespace viewbias
