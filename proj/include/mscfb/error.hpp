#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mscfb {

enum class ErrorCode {
    // numerics
    DimensionMismatch,
    NotSymmetric,
    NotPositiveDefinite,
    NonPositiveAlpha,
    // imaging
    BadMagic,
    UnsupportedMaxval,
    TruncatedData,
    MalformedHeader,
    NonDivisibleGeometry,
    // filterbank
    UnknownClass,
    EmptyClass,
    NoImpostors,
    AlphaOutOfRange,
    SolverFailure,
    ZeroVector,
    BadModel,
    // recognition
    SpecMismatch,
    EmptyGallery,
    // harness
    FileNotFound,
    MalformedRow,
    DuplicatePath,
    InvalidGeometry,
    InsufficientSamples,
    UnseenSubjectsRequireNN,
    IoFailure,
    Usage,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonDivisibleGeometry: return "NonDivisibleGeometry";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::NoImpostors: return "NoImpostors";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::BadModel: return "BadModel";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicatePath: return "DuplicatePath";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::UnseenSubjectsRequireNN: return "UnseenSubjectsRequireNN";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::Usage: return "Usage";
    }
    return "Unknown";
}

/// Every failure raised by the library. `code()` identifies the failure
/// class; `what()` carries the human-readable context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Process exit status for a failure: 1 usage, 2 data/format, 3 numerical.
constexpr int exit_code(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::AlphaOutOfRange:
    case ErrorCode::NonPositiveAlpha:
    case ErrorCode::UnseenSubjectsRequireNN:
        return 1;
    case ErrorCode::NotSymmetric:
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::SolverFailure:
    case ErrorCode::ZeroVector:
        return 3;
    default:
        return 2;
    }
}

namespace detail {
inline void require(bool ok, ErrorCode code, const std::string& message) {
    if (!ok) throw Error(code, message);
}
} // namespace detail

} // namespace mscfb
