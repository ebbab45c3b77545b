#include "delayrec/error.hpp"

namespace delayrec {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankDeficientH: return "RankDeficientH";
    case ErrorCode::TooManyOutputs: return "TooManyOutputs";
    case ErrorCode::TooManyInputs: return "TooManyInputs";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::QIndefinite: return "QIndefinite";
    case ErrorCode::RNotPositiveDefinite: return "RNotPositiveDefinite";
    case ErrorCode::DelayOutOfRange: return "DelayOutOfRange";
    case ErrorCode::PencilDegenerate: return "PencilDegenerate";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::SingularMarkovParameter: return "SingularMarkovParameter";
    case ErrorCode::LowerMarkovNonzero: return "LowerMarkovNonzero";
    case ErrorCode::NoUnbiasedGainExists: return "NoUnbiasedGainExists";
    case ErrorCode::InnovationCovarianceSingular: return "InnovationCovarianceSingular";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::InfeasibleDelay: return "InfeasibleDelay";
    case ErrorCode::GainSingular: return "GainSingular";
    case ErrorCode::BadCoefficient: return "BadCoefficient";
    case ErrorCode::BadIndices: return "BadIndices";
    case ErrorCode::UnknownExample: return "UnknownExample";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace delayrec
