#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rpir {

enum class ErrorCode {
    DegenerateData,
    InvalidConfig,
    OutOfDomain,
    DimensionMismatch,
    ZeroColumnBlock,
    SingularPenalty,
    InsufficientSpectrum,
    NonConvergence,
    ZeroPenalty,
    SingularNormalMatrix,
    RankDeficient,
    TooLarge,
    SingularSample,
    ZeroReference,
    ParseError,
    IncompleteGrid,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// 2 = configuration, 3 = numerical failure, 4 = I/O.
int exit_code_for(ErrorCode code);

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroColumnBlock: return "ZeroColumnBlock";
        case ErrorCode::SingularPenalty: return "SingularPenalty";
        case ErrorCode::InsufficientSpectrum: return "InsufficientSpectrum";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::ZeroPenalty: return "ZeroPenalty";
        case ErrorCode::SingularNormalMatrix: return "SingularNormalMatrix";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::SingularSample: return "SingularSample";
        case ErrorCode::ZeroReference: return "ZeroReference";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IncompleteGrid: return "IncompleteGrid";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

inline int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidConfig:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::OutOfDomain:
            return 2;
        case ErrorCode::ParseError:
        case ErrorCode::IncompleteGrid:
        case ErrorCode::IoError:
            return 4;
        default:
            return 3;
    }
}

}  // namespace rpir
