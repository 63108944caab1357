#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "callmask/dataset.hpp"
#include "callmask/decoder.hpp"
#include "callmask/mock_lm.hpp"

namespace callmask {

enum class MatchMode { Strict, Relaxed };
enum class FailureCause { None, WrongFunction, WrongArguments, ParseFailure, BudgetExhausted };

std::string_view mode_name(MatchMode mode);
std::string_view cause_name(FailureCause cause);

struct MatchResult {
  bool correct = false;
  FailureCause cause = FailureCause::None;
};

/// Structural comparison: same name, positionally equal arguments.
MatchResult match_call(const CallExpression& predicted, const CallExpression& gold);

/// Compares raw model text against `gold`. Strict parses the text as is;
/// relaxed first applies relaxed_normalize. Argument types are checked
/// against `presented` (the functions shown for the entry).
MatchResult match_call(std::string_view predicted, const CallExpression& gold, MatchMode mode,
                       const FunctionRegistry& presented);

/// Cuts everything from the end marker on, turns double-quoted strings into
/// single-quoted ones and drops whitespace outside quotes.
std::string relaxed_normalize(std::string_view text);

/// Builds the model for dataset entry `index`. Called concurrently when
/// jobs > 1.
using ModelFactory = std::function<std::unique_ptr<LanguageModel>(const DataPoint& entry, std::size_t index)>;

/// Per-entry mocks: seed mixed with the entry index; scripted variants
/// follow the entry's gold call.
ModelFactory mock_factory(MockSpec spec, std::shared_ptr<const Vocabulary> vocab);

/// Text in, text out. No logits, so only unmasked decoding applies.
class TextModel {
 public:
  virtual ~TextModel() = default;
  virtual std::string complete(std::string_view prompt) = 0;
};

struct EvalOptions {
  bool masked = true;
  MatchMode mode = MatchMode::Strict;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t jobs = 1;
  MaskStrategy strategy = MaskStrategy::Indexed;
};

struct EntryOutcome {
  bool correct = false;
  FailureCause cause = FailureCause::None;
  std::string text;    // decoded text; empty when the budget ran out
  std::string detail;  // error message for failures raised by the decoder
};

struct ModeReport {
  std::string label;  // "masked", "unmasked", "remote"
  MatchMode mode = MatchMode::Strict;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t wrong_function = 0;
  std::size_t wrong_arguments = 0;
  std::size_t parse_failure = 0;
  std::size_t budget_exhausted = 0;
  std::vector<EntryOutcome> outcomes;

  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct AccuracyReport {
  std::vector<ModeReport> sections;

  std::string to_json(bool with_outcomes = false) const;
  std::string to_table() const;
};

/// Decodes every entry (masked via decode_greedy, else decode_unmasked) and
/// matches it against the gold call. Throws Error(InvalidArgument) for an
/// empty dataset; per-entry failures land in the breakdown.
ModeReport run_eval(std::span<const DataPoint> dataset, const Vocabulary& vocab, const ModelFactory& factory,
                    const EvalOptions& options);

/// Masked and unmasked sections over the same models.
AccuracyReport run_paired(std::span<const DataPoint> dataset, const Vocabulary& vocab, const ModelFactory& factory,
                          EvalOptions options);

/// Sends each entry's inference prompt to `model`, sequentially.
ModeReport run_text_eval(std::span<const DataPoint> dataset, TextModel& model, MatchMode mode);

}  // namespace callmask
