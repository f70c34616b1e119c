#include "ribmorph/error.hpp"

namespace ribmorph {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::MalformedHeader: return "malformed_header";
    case ErrorCode::UnsupportedDatatype: return "unsupported_datatype";
    case ErrorCode::NonIntegralLabel: return "non_integral_label";
    case ErrorCode::NegativeLabel: return "negative_label";
    case ErrorCode::BadDimensionality: return "bad_dimensionality";
    case ErrorCode::TruncatedData: return "truncated_data";
    case ErrorCode::NotAxisDominant: return "not_axis_dominant";
    case ErrorCode::GzipError: return "gzip_error";
    case ErrorCode::LabelOverflow: return "label_overflow";
    case ErrorCode::OutOfBounds: return "out_of_bounds";
    case ErrorCode::EmptyMask: return "empty_mask";
    case ErrorCode::GridMismatch: return "grid_mismatch";
    case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::InsufficientPath: return "insufficient_path";
    case ErrorCode::IterationCap: return "iteration_cap";
    case ErrorCode::SingleClass: return "single_class";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::SchemaViolation: return "schema_violation";
    case ErrorCode::Overlap: return "overlap";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

}  // namespace ribmorph
