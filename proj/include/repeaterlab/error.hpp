#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repeaterlab {

enum class ErrorCode {
    // Input validation (CLI exit code 2).
    NonSquare,
    RowSumViolation,
    EntryOutOfRange,
    InvalidDistribution,
    StateOutOfRange,
    LabelMismatch,
    RowMismatch,
    InvalidTau,
    EmptyRounds,
    ProbabilityOutOfRange,
    WrongHeraldCount,
    ZeroProbability,
    DegenerateChain,
    ArgumentOutOfRange,
    HorizonTooLarge,
    InvalidConfig,
    InvalidSpec,
    IoFailure,
    // Numerical failure (CLI exit code 3).
    NoReturnPath,
    NotConverged,
    SingularSystem,
    SingularMatrix,
    NonFiniteValue,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::EntryOutOfRange: return "EntryOutOfRange";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::StateOutOfRange: return "StateOutOfRange";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::RowMismatch: return "RowMismatch";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::EmptyRounds: return "EmptyRounds";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::WrongHeraldCount: return "WrongHeraldCount";
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::DegenerateChain: return "DegenerateChain";
    case ErrorCode::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NoReturnPath: return "NoReturnPath";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

constexpr bool is_numerical(ErrorCode code) {
    return code >= ErrorCode::NoReturnPath;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace repeaterlab
