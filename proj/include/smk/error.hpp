#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace smk {

enum class ErrorCode {
    MalformedFile,
    InvalidScale,
    EmptyMask,
    CenterOutsideMask,
    CenterNotInterior,
    DegenerateHull,
    ZeroRadii,
    NonPositiveAR,
    EmptyBatch,
    DimensionMismatch,
    InvalidArgument,
    MalformedXML,
    MalformedPointList,
    DegeneratePolygon,
    MissingDimensions,
};

/// Stable identifier for an error code, e.g. "EmptyMask". Used verbatim in reports.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace smk
