#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsprobe {

// Every failure surfaced to callers carries one of these codes. The CLI maps
// each code to its own process exit status.
enum class ErrorCode {
    kInvalidArgument,
    kIo,
    kBadMagic,
    kBadVersion,
    kTruncated,
    kCorrupt,
    kDimensionMismatch,
    kConfig,
    kNonFinite,
    kLabelingFailure,
    kMetricUndefined,
    kLocked,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Process exit status for a code; 0 and 1 are never returned.
int exit_code_for(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        fail(code, message);
    }
}

}  // namespace hsprobe
