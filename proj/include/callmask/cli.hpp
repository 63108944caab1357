#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "callmask/metrics.hpp"

namespace callmask::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;       // bad flags, unreadable files, invalid documents
inline constexpr int kExitDecode = 2;      // ConstraintDeadlock or BudgetExhausted
inline constexpr int kExitViolation = 3;   // theorem counterexample

/// Test seams. Empty members mean the production functions.
struct Hooks {
  LossFunction masked_loss;
  PrecisionFunction precision;
};

/// Runs one command line (without the program name). Never throws.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Hooks& hooks = {});

}  // namespace callmask::cli
