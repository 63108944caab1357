#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace callmask {

enum class ErrorCode {
  MalformedStub,
  DuplicateFunctionName,
  SchemaViolation,
  ParseError,
  UnknownFunction,
  ArityMismatch,
  TypeMismatch,
  EmptyWord,
  DeadState,
  UnspellableRegistry,
  ConstraintDeadlock,
  MaskedTokenStep,
  BudgetExhausted,
  InvalidDistribution,
  ZeroProbabilityGold,
  GoldMasked,
  LengthMismatch,
  MissingSentinel,
  RegistryTooSmall,
  UnbalancedSpecs,
  BadSpec,
  Io,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (eval harness, CLI exit codes) can tell causes apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace callmask
