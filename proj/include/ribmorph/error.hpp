#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ribmorph {

/// Every failure the library reports carries one of these codes so callers
/// (and the CLI exit path) can tell error classes apart without parsing text.
enum class ErrorCode {
    InvalidArgument,
    MalformedHeader,
    UnsupportedDatatype,
    NonIntegralLabel,
    NegativeLabel,
    BadDimensionality,
    TruncatedData,
    NotAxisDominant,
    GzipError,
    LabelOverflow,
    OutOfBounds,
    EmptyMask,
    GridMismatch,
    DegenerateGeometry,
    InsufficientPath,
    IterationCap,
    SingleClass,
    DimensionMismatch,
    SchemaViolation,
    Overlap,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ribmorph
