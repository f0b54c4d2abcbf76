#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kmu {

enum class ErrorCode {
    SyntaxError,
    UnknownIdentifier,
    VariableIndexOutOfRange,
    DomainError,
    IoError,
    SchemaError,
    ConstraintViolated,
    FrameRankDeficient,
    SpanResidualExceeded,
    WrongBackend,
    SasakianLimit,
    MetricNotPositiveDefinite,
    NonPositiveConstant,
    SingularMetric,
    NotNullity,
    NonConstantAcrossPoints,
    NoSplitting,
    SpectrumNotPaired,
    FormulaMismatch,
    ZeroDenominator,
    NotComplementary,
    ChartFrameNotAdapted,
    SingularRestriction,
    NotKappaMu,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. The code identifies the condition;
/// the message carries the offending location or residual.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kmu
