#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpopt {

enum class Errc {
    // input data
    MalformedRecord,
    EmptyFile,
    UnsortedInput,
    EmptyRange,
    NetworkError,
    PaginationGap,
    EmptySeries,
    LookbackUnderflow,
    InsufficientHistory,
    EmptyPath,
    RowSumViolation,
    EpochMismatch,
    MissingEpoch,
    PeriodMismatch,
    TooFewRows,
    IoError,
    // configuration / contract
    InvalidArgument,
    OutOfPartition,
    SupportClipped,
    DegenerateBucket,
    ShapeMismatch,
    // numerics
    NonfiniteResult,
    NonfiniteWeight,
    NonfiniteLoss,
    ZeroPoolLiquidity,
};

enum class ErrorClass { Validation, Data, Numerical };

constexpr std::string_view to_string(Errc c) noexcept {
    switch (c) {
        case Errc::MalformedRecord: return "MalformedRecord";
        case Errc::EmptyFile: return "EmptyFile";
        case Errc::UnsortedInput: return "UnsortedInput";
        case Errc::EmptyRange: return "EmptyRange";
        case Errc::NetworkError: return "NetworkError";
        case Errc::PaginationGap: return "PaginationGap";
        case Errc::EmptySeries: return "EmptySeries";
        case Errc::LookbackUnderflow: return "LookbackUnderflow";
        case Errc::InsufficientHistory: return "InsufficientHistory";
        case Errc::EmptyPath: return "EmptyPath";
        case Errc::RowSumViolation: return "RowSumViolation";
        case Errc::EpochMismatch: return "EpochMismatch";
        case Errc::MissingEpoch: return "MissingEpoch";
        case Errc::PeriodMismatch: return "PeriodMismatch";
        case Errc::TooFewRows: return "TooFewRows";
        case Errc::IoError: return "IoError";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::OutOfPartition: return "OutOfPartition";
        case Errc::SupportClipped: return "SupportClipped";
        case Errc::DegenerateBucket: return "DegenerateBucket";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::NonfiniteResult: return "NonfiniteResult";
        case Errc::NonfiniteWeight: return "NonfiniteWeight";
        case Errc::NonfiniteLoss: return "NonfiniteLoss";
        case Errc::ZeroPoolLiquidity: return "ZeroPoolLiquidity";
    }
    return "Unknown";
}

constexpr ErrorClass classify(Errc c) noexcept {
    switch (c) {
        case Errc::InvalidArgument:
        case Errc::OutOfPartition:
        case Errc::SupportClipped:
        case Errc::DegenerateBucket:
        case Errc::ShapeMismatch:
            return ErrorClass::Validation;
        case Errc::NonfiniteResult:
        case Errc::NonfiniteWeight:
        case Errc::NonfiniteLoss:
        case Errc::ZeroPoolLiquidity:
            return ErrorClass::Numerical;
        default:
            return ErrorClass::Data;
    }
}

/// Process exit code for the CLI: 2 validation, 3 data, 4 numerical.
constexpr int exit_code(Errc c) noexcept {
    switch (classify(c)) {
        case ErrorClass::Validation: return 2;
        case ErrorClass::Data: return 3;
        case ErrorClass::Numerical: return 4;
    }
    return 1;
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace lpopt
