#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delayrec {

enum class ErrorCode {
    DimensionMismatch,
    RankDeficientH,
    TooManyOutputs,
    TooManyInputs,
    NotSymmetric,
    QIndefinite,
    RNotPositiveDefinite,
    DelayOutOfRange,
    PencilDegenerate,
    NotSquare,
    SingularMarkovParameter,
    LowerMarkovNonzero,
    NoUnbiasedGainExists,
    InnovationCovarianceSingular,
    PreconditionViolated,
    ConstraintViolated,
    InfeasibleDelay,
    GainSingular,
    BadCoefficient,
    BadIndices,
    UnknownExample,
    ParseError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure carries a machine-checkable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace delayrec
