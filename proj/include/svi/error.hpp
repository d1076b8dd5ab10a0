#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svi {

enum class ErrorCode {
    InvalidLabel,
    InvalidRange,
    DimensionMismatch,
    InvalidDimension,
    EmptyBatch,
    MeanUnavailable,
    InvalidStep,
    LineSearchStalled,
    DegenerateMixing,
    TooLargeForEnumeration,
    InvalidCovariance,
    WindowOverrun,
    DegenerateVariance,
    DataError,
    IoError,
    ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the Python layer) can branch on the kind without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace svi
