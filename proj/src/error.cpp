#include "hsprobe/error.hpp"

namespace hsprobe {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "invalid_argument";
        case ErrorCode::kIo: return "io";
        case ErrorCode::kBadMagic: return "bad_magic";
        case ErrorCode::kBadVersion: return "bad_version";
        case ErrorCode::kTruncated: return "truncated";
        case ErrorCode::kCorrupt: return "corrupt";
        case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
        case ErrorCode::kConfig: return "config";
        case ErrorCode::kNonFinite: return "non_finite";
        case ErrorCode::kLabelingFailure: return "labeling_failure";
        case ErrorCode::kMetricUndefined: return "metric_undefined";
        case ErrorCode::kLocked: return "locked";
    }
    return "unknown";
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kInvalidArgument: return 3;
        case ErrorCode::kIo: return 4;
        case ErrorCode::kBadMagic: return 5;
        case ErrorCode::kBadVersion: return 6;
        case ErrorCode::kTruncated: return 7;
        case ErrorCode::kCorrupt: return 8;
        case ErrorCode::kDimensionMismatch: return 9;
        case ErrorCode::kConfig: return 10;
        case ErrorCode::kNonFinite: return 11;
        case ErrorCode::kLabelingFailure: return 12;
        case ErrorCode::kMetricUndefined: return 13;
        case ErrorCode::kLocked: return 14;
    }
    return 1;
}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace hsprobe
