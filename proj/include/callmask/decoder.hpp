#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "callmask/mask.hpp"
#include "callmask/schema.hpp"
#include "callmask/trie.hpp"
#include "callmask/typematch.hpp"

namespace callmask {

using TokenId = std::uint32_t;

inline constexpr std::size_t kDefaultMaxTokens = 512;

/// Token strings indexed by id. Tokens are arbitrary non-empty strings and
/// may cross grammar boundaries.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<std::string> tokens);

  /// One token per printable ASCII character (0x20..0x7e).
  static Vocabulary printable_ascii();
  static Vocabulary from_json(std::string_view document);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<TokenId> find(std::string_view token) const;
  bool covers(char ch) const;

  /// Greedy longest-match tokenization. Throws Error(InvalidArgument) when
  /// some position cannot be covered.
  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::size_t longest_ = 0;
  bool covered_[256] = {};
};

/// Source of next-token distributions: P(x_{t+1} | x_{1:t}).
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::vector<double> next_distribution(std::span<const TokenId> context) const = 0;
};

enum class Phase { FunctionName, OpenParen, Value, Separator, EndMarker, Done };

std::string_view phase_name(Phase phase);

/// How compute_mask tests candidate tokens while spelling a function name:
/// Indexed looks name+token up in the prefix hash set; Simulation walks the
/// name trie character by character. Both must produce identical masks.
enum class MaskStrategy { Indexed, Simulation };

/// Registry compiled for decoding: name trie and prefix set.
class CallGrammar {
 public:
  explicit CallGrammar(std::shared_ptr<const FunctionRegistry> registry);

  const FunctionRegistry& registry() const { return *registry_; }
  const Trie& names() const { return names_; }
  const PrefixSet& name_prefixes() const { return name_prefixes_; }

 private:
  std::shared_ptr<const FunctionRegistry> registry_;
  Trie names_;
  PrefixSet name_prefixes_;
};

/// Position of a decode inside the response grammar
///   name '(' value (',' ' '* value)* ')' '<nexa_end>'
/// plus the tokens emitted so far.
///
/// Phases: FunctionName while spelling the name; OpenParen after '(' of a
/// zero-argument call; Value(i) while matching argument i; Separator after
/// ',' (spaces allowed); EndMarker while spelling the end marker; Done.
class DecodeState {
 public:
  Phase phase() const { return cursor_.phase; }
  std::size_t arg_index() const { return cursor_.arg_index; }
  std::string_view name_prefix() const { return cursor_.name; }
  const FunctionSchema* resolved_schema() const { return cursor_.schema; }
  const Matcher* value_matcher() const { return cursor_.value ? &*cursor_.value : nullptr; }
  bool done() const { return cursor_.phase == Phase::Done; }

  const std::vector<TokenId>& emitted() const { return emitted_; }
  const std::string& char_stream() const { return char_stream_; }

  const Vocabulary& vocabulary() const { return *vocab_; }
  const FunctionRegistry& registry() const { return grammar_->registry(); }
  MaskStrategy strategy() const { return strategy_; }

 private:
  struct Cursor {
    Phase phase = Phase::FunctionName;
    Trie::Cursor name_cursor;
    std::string name;
    const FunctionSchema* schema = nullptr;
    std::size_t arg_index = 0;
    std::optional<Matcher> value;
    std::size_t marker_pos = 0;

    bool feed(char ch, const CallGrammar& grammar);
    bool feed(std::string_view chars, const CallGrammar& grammar);
  };

  friend DecodeState new_session(std::shared_ptr<const FunctionRegistry>, std::shared_ptr<const Vocabulary>,
                                 MaskStrategy);
  friend MaskVector compute_mask(const DecodeState&);
  friend DecodeState step(DecodeState, TokenId);

  std::shared_ptr<const CallGrammar> grammar_;
  std::shared_ptr<const Vocabulary> vocab_;
  MaskStrategy strategy_ = MaskStrategy::Indexed;
  Cursor cursor_;
  std::vector<TokenId> emitted_;
  std::string char_stream_;
};

/// Throws Error(UnspellableRegistry) if some character needed to spell a
/// registered call appears in no token.
DecodeState new_session(std::shared_ptr<const FunctionRegistry> registry, std::shared_ptr<const Vocabulary> vocab,
                        MaskStrategy strategy = MaskStrategy::Indexed);
DecodeState new_session(const FunctionRegistry& registry, const Vocabulary& vocab,
                        MaskStrategy strategy = MaskStrategy::Indexed);

/// Token i is unmasked iff spelling its characters from the current state
/// keeps the response viable; tokens may cross phase boundaries.
/// Throws Error(ConstraintDeadlock) if every token is masked or the state is Done.
MaskVector compute_mask(const DecodeState& state);

/// Appends `token`. Throws Error(MaskedTokenStep) if the token is masked.
DecodeState step(DecodeState state, TokenId token);

struct TraceStep {
  std::size_t step = 0;
  std::optional<Phase> phase;  // empty for unconstrained decodes
  std::vector<double> dist;
  MaskVector mask;
  TokenId chosen = 0;
  double chosen_raw = 0.0;   // dist[chosen] * mask[chosen]
  double chosen_prob = 0.0;  // renormalized probability of the chosen token
  bool zero_mass_fallback = false;
};

struct DecodeTrace {
  bool masked = true;
  std::vector<TraceStep> steps;

  /// One JSON object per line: step, dist_digest, mask_cardinality, chosen,
  /// token, phase, chosen_raw, chosen_prob, fallback.
  std::string to_jsonl(const Vocabulary& vocab) const;
};

/// 64-bit FNV-1a over the IEEE-754 bit patterns, as 16 hex digits.
std::string distribution_digest(std::span<const double> dist);

struct DecodeResult {
  CallExpression call;
  std::string text;
  DecodeTrace trace;
};

/// Masked greedy decoding: argmax of P ⊙ mask at every step until Done.
/// Throws Error(BudgetExhausted) or Error(ConstraintDeadlock).
DecodeResult decode_greedy(const LanguageModel& lm, DecodeState state, std::size_t max_tokens = kDefaultMaxTokens);

struct UnmaskedResult {
  std::string text;
  DecodeTrace trace;
};

/// Plain argmax decoding with no mask; stops once the end marker has been
/// spelled. The text may not parse. Throws Error(BudgetExhausted).
UnmaskedResult decode_unmasked(const LanguageModel& lm, const DecodeState& state,
                               std::size_t max_tokens = kDefaultMaxTokens);

/// Teacher-forced pass over `gold`: records the model distribution and the
/// mask at each step while stepping the gold tokens. `chosen` is the masked
/// argmax the decoder would have picked.
DecodeTrace decode_forced(const LanguageModel& lm, DecodeState state, std::span<const TokenId> gold);

}  // namespace callmask
