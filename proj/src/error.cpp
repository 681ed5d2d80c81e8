#include "smk/error.hpp"

namespace smk {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::InvalidScale: return "InvalidScale";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::CenterOutsideMask: return "CenterOutsideMask";
        case ErrorCode::CenterNotInterior: return "CenterNotInterior";
        case ErrorCode::DegenerateHull: return "DegenerateHull";
        case ErrorCode::ZeroRadii: return "ZeroRadii";
        case ErrorCode::NonPositiveAR: return "NonPositiveAR";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MalformedXML: return "MalformedXML";
        case ErrorCode::MalformedPointList: return "MalformedPointList";
        case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
        case ErrorCode::MissingDimensions: return "MissingDimensions";
    }
    return "Unknown";
}

}  // namespace smk
