#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "callmask/schema.hpp"
#include "callmask/trie.hpp"

namespace callmask {

enum class MatchStatus { Incomplete, Complete, Dead };

/// Incremental recognizer for one argument literal. Consumes one character
/// at a time and tracks whether what it has seen can still grow into a
/// valid literal of its type.
///
/// Lexeme grammars:
///   integer  -?[0-9]+
///   float    -?[0-9]+\.[0-9]+
///   string   '[^'\n]*'
///   boolean  True | False
///   enum     a quoted member, walked through the type's trie
///   dict     {'key': value, ...} with string keys, scalar or dict values,
///            optional spaces after ':' and ',', at most 4 levels deep
///
/// Dead is absorbing. Matchers are small values; advanced() never mutates.
class Matcher {
 public:
  explicit Matcher(const ArgType& type);

  ArgKind kind() const { return kind_; }
  MatchStatus status() const { return status_; }
  bool viable() const { return status_ != MatchStatus::Dead; }
  bool complete() const { return status_ == MatchStatus::Complete; }
  const std::string& consumed() const { return consumed_; }
  /// Current brace depth; always 0 for non-dict matchers.
  std::size_t nesting() const { return frames_.size(); }

  void feed(char ch);
  void feed(std::string_view chars);
  Matcher advanced(char ch) const;
  Matcher advanced(std::string_view chars) const;

  /// Lexeme states shared by top-level scalars and dict values.
  enum class Lexeme : std::uint8_t { Integer, Float, Number, String, Boolean, Enum, None };

 private:
  enum class DictPhase : std::uint8_t { Open, Key, AfterKey, BeforeValue, Value, AfterValue, AfterComma };

  struct Scalar {
    Lexeme lexeme = Lexeme::None;
    std::uint8_t state = 0;
    std::uint8_t word = 0;  // boolean: 1 = True, 2 = False
    bool step(char ch);
    bool complete() const;
  };

  bool step_dict(char ch);
  bool dict_after_value(char ch);
  bool start_dict_value(char ch);

  ArgKind kind_;
  MatchStatus status_ = MatchStatus::Incomplete;
  std::string consumed_;
  Scalar scalar_;
  std::shared_ptr<const Trie> enum_index_;
  Trie::Cursor enum_cursor_;
  std::vector<DictPhase> frames_;
  bool dict_closed_ = false;
};

Matcher new_matcher(const ArgType& type);
Matcher advance(const Matcher& state, char ch);

/// Entry i is true iff feeding all of candidates[i] keeps the matcher
/// viable. Throws Error(DeadState) when `state` is already dead.
std::vector<bool> allowed_continuations(const Matcher& state, std::span<const std::string> candidates);

/// Full-lexeme check: true iff `text` is exactly one literal of `type`.
bool recognizes(const ArgType& type, std::string_view text);

}  // namespace callmask
