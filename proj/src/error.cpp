#include "kmu/error.hpp"

namespace kmu {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorCode::VariableIndexOutOfRange: return "VariableIndexOutOfRange";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::ConstraintViolated: return "ConstraintViolated";
        case ErrorCode::FrameRankDeficient: return "FrameRankDeficient";
        case ErrorCode::SpanResidualExceeded: return "SpanResidualExceeded";
        case ErrorCode::WrongBackend: return "WrongBackend";
        case ErrorCode::SasakianLimit: return "SasakianLimit";
        case ErrorCode::MetricNotPositiveDefinite: return "MetricNotPositiveDefinite";
        case ErrorCode::NonPositiveConstant: return "NonPositiveConstant";
        case ErrorCode::SingularMetric: return "SingularMetric";
        case ErrorCode::NotNullity: return "NotNullity";
        case ErrorCode::NonConstantAcrossPoints: return "NonConstantAcrossPoints";
        case ErrorCode::NoSplitting: return "NoSplitting";
        case ErrorCode::SpectrumNotPaired: return "SpectrumNotPaired";
        case ErrorCode::FormulaMismatch: return "FormulaMismatch";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
        case ErrorCode::NotComplementary: return "NotComplementary";
        case ErrorCode::ChartFrameNotAdapted: return "ChartFrameNotAdapted";
        case ErrorCode::SingularRestriction: return "SingularRestriction";
        case ErrorCode::NotKappaMu: return "NotKappaMu";
    }
    return "UnknownError";
}

}  // namespace kmu
