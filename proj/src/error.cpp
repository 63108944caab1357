#include "callmask/error.hpp"

namespace callmask {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedStub: return "MalformedStub";
    case ErrorCode::DuplicateFunctionName: return "DuplicateFunctionName";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::EmptyWord: return "EmptyWord";
    case ErrorCode::DeadState: return "DeadState";
    case ErrorCode::UnspellableRegistry: return "UnspellableRegistry";
    case ErrorCode::ConstraintDeadlock: return "ConstraintDeadlock";
    case ErrorCode::MaskedTokenStep: return "MaskedTokenStep";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::ZeroProbabilityGold: return "ZeroProbabilityGold";
    case ErrorCode::GoldMasked: return "GoldMasked";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingSentinel: return "MissingSentinel";
    case ErrorCode::RegistryTooSmall: return "RegistryTooSmall";
    case ErrorCode::UnbalancedSpecs: return "UnbalancedSpecs";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

}  // namespace callmask
