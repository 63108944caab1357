#include "callmask/typematch.hpp"

#include "callmask/error.hpp"

namespace callmask {

namespace {

constexpr std::size_t kMaxDictDepth = 4;
constexpr std::string_view kTrue = "True";
constexpr std::string_view kFalse = "False";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

// Numeric states: 0 start, 1 after '-', 2 integer digits, 3 after '.', 4 fraction digits.
// String states: 0 start, 1 inside body, 2 closed.
bool Matcher::Scalar::step(char ch) {
  switch (lexeme) {
    case Lexeme::Integer:
      if (is_digit(ch) && state <= 2) {
        state = 2;
        return true;
      }
      if (ch == '-' && state == 0) {
        state = 1;
        return true;
      }
      return false;
    case Lexeme::Float:
    case Lexeme::Number:
      if (is_digit(ch)) {
        if (state <= 2) state = 2;
        else state = 4;
        return true;
      }
      if (ch == '-' && state == 0) {
        state = 1;
        return true;
      }
      if (ch == '.' && state == 2) {
        state = 3;
        return true;
      }
      return false;
    case Lexeme::String:
      if (state == 0) {
        if (ch != '\'') return false;
        state = 1;
        return true;
      }
      if (state == 1) {
        if (ch == '\n') return false;
        if (ch == '\'') state = 2;
        return true;
      }
      return false;
    case Lexeme::Boolean: {
      if (word == 0) {
        if (ch == 'T') word = 1;
        else if (ch == 'F') word = 2;
        else return false;
        state = 1;
        return true;
      }
      std::string_view target = word == 1 ? kTrue : kFalse;
      if (state < target.size() && target[state] == ch) {
        ++state;
        return true;
      }
      return false;
    }
    case Lexeme::Enum:
    case Lexeme::None:
      return false;
  }
  return false;
}

bool Matcher::Scalar::complete() const {
  switch (lexeme) {
    case Lexeme::Integer: return state == 2;
    case Lexeme::Float: return state == 4;
    case Lexeme::Number: return state == 2 || state == 4;
    case Lexeme::String: return state == 2;
    case Lexeme::Boolean: return word != 0 && state == (word == 1 ? kTrue.size() : kFalse.size());
    case Lexeme::Enum:
    case Lexeme::None: return false;
  }
  return false;
}

Matcher::Matcher(const ArgType& type) : kind_(type.kind()) {
  switch (kind_) {
    case ArgKind::String: scalar_.lexeme = Lexeme::String; break;
    case ArgKind::Integer: scalar_.lexeme = Lexeme::Integer; break;
    case ArgKind::Float: scalar_.lexeme = Lexeme::Float; break;
    case ArgKind::Boolean: scalar_.lexeme = Lexeme::Boolean; break;
    case ArgKind::Enum:
      scalar_.lexeme = Lexeme::Enum;
      enum_index_ = type.enum_index();
      enum_cursor_ = enum_index_->root_cursor();
      break;
    case ArgKind::Dict: scalar_.lexeme = Lexeme::None; break;
  }
}

bool Matcher::start_dict_value(char ch) {
  scalar_ = Scalar{};
  if (ch == '\'') scalar_.lexeme = Lexeme::String;
  else if (ch == '-' || is_digit(ch)) scalar_.lexeme = Lexeme::Number;
  else if (ch == 'T' || ch == 'F') scalar_.lexeme = Lexeme::Boolean;
  else return false;
  frames_.back() = DictPhase::Value;
  return scalar_.step(ch);
}

bool Matcher::dict_after_value(char ch) {
  if (ch == ',') {
    frames_.back() = DictPhase::AfterComma;
    return true;
  }
  if (ch == '}') {
    frames_.pop_back();
    if (frames_.empty()) dict_closed_ = true;
    else frames_.back() = DictPhase::AfterValue;
    return true;
  }
  return false;
}

bool Matcher::step_dict(char ch) {
  if (dict_closed_) return false;
  if (frames_.empty()) {
    if (ch != '{') return false;
    frames_.push_back(DictPhase::Open);
    return true;
  }
  DictPhase& phase = frames_.back();
  switch (phase) {
    case DictPhase::Open:
      if (ch == '}') return dict_after_value(ch);
      [[fallthrough]];
    case DictPhase::AfterComma:
      if (ch == ' ' && phase == DictPhase::AfterComma) return true;
      if (ch != '\'') return false;
      phase = DictPhase::Key;
      return true;
    case DictPhase::Key:
      if (ch == '\n') return false;
      if (ch == '\'') phase = DictPhase::AfterKey;
      return true;
    case DictPhase::AfterKey:
      if (ch != ':') return false;
      phase = DictPhase::BeforeValue;
      return true;
    case DictPhase::BeforeValue:
      if (ch == ' ') return true;
      if (ch == '{') {
        if (frames_.size() >= kMaxDictDepth) return false;
        phase = DictPhase::Value;
        scalar_ = Scalar{};
        frames_.push_back(DictPhase::Open);
        return true;
      }
      return start_dict_value(ch);
    case DictPhase::Value:
      if (scalar_.step(ch)) return true;
      if (!scalar_.complete()) return false;
      phase = DictPhase::AfterValue;
      return dict_after_value(ch);
    case DictPhase::AfterValue:
      return dict_after_value(ch);
  }
  return false;
}

void Matcher::feed(char ch) {
  if (status_ == MatchStatus::Dead) return;
  bool alive = false;
  bool done = false;
  if (kind_ == ArgKind::Dict) {
    alive = step_dict(ch);
    done = dict_closed_;
  } else if (kind_ == ArgKind::Enum) {
    alive = enum_cursor_.advance(ch);
    done = enum_cursor_.at_word();
  } else {
    alive = scalar_.step(ch);
    done = scalar_.complete();
  }
  if (!alive) {
    status_ = MatchStatus::Dead;
    return;
  }
  consumed_.push_back(ch);
  status_ = done ? MatchStatus::Complete : MatchStatus::Incomplete;
}

void Matcher::feed(std::string_view chars) {
  for (char ch : chars) {
    feed(ch);
    if (status_ == MatchStatus::Dead) return;
  }
}

Matcher Matcher::advanced(char ch) const {
  Matcher next = *this;
  next.feed(ch);
  return next;
}

Matcher Matcher::advanced(std::string_view chars) const {
  Matcher next = *this;
  next.feed(chars);
  return next;
}

Matcher new_matcher(const ArgType& type) { return Matcher(type); }

Matcher advance(const Matcher& state, char ch) { return state.advanced(ch); }

std::vector<bool> allowed_continuations(const Matcher& state, std::span<const std::string> candidates) {
  if (!state.viable()) throw Error(ErrorCode::DeadState, "matcher is dead; no continuation is possible");
  std::vector<bool> allowed(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) allowed[i] = state.advanced(candidates[i]).viable();
  return allowed;
}

bool recognizes(const ArgType& type, std::string_view text) { return Matcher(type).advanced(text).complete(); }

}  // namespace callmask
