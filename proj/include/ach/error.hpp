#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ach {

enum class ErrorCode {
    LeadingZero,
    OddLeadingDegree,
    NonPositiveLeading,
    OutOfWindow,
    NonPositiveLevi,
    JacobiViolation,
    ValidationFailed,
    IncompatibleJ,
    SingularSystem,
    BoundaryMismatch,
    SingularStage,
    WindowTooLarge,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ach
