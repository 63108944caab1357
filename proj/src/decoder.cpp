#include "callmask/decoder.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <set>

#include "callmask/error.hpp"
#include "json.hpp"

namespace callmask {

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw Error(ErrorCode::InvalidArgument, "vocabulary is empty");
  for (const auto& t : tokens_) {
    if (t.empty()) throw Error(ErrorCode::InvalidArgument, "vocabulary tokens must be non-empty");
    longest_ = std::max(longest_, t.size());
    for (char ch : t) covered_[static_cast<unsigned char>(ch)] = true;
  }
}

Vocabulary Vocabulary::printable_ascii() {
  std::vector<std::string> tokens;
  for (int c = 0x20; c <= 0x7e; ++c) tokens.emplace_back(1, static_cast<char>(c));
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::from_json(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("vocabulary is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::InvalidArgument, "vocabulary document must be a list of strings");
  std::vector<std::string> tokens;
  for (const auto& t : doc) {
    if (!t.is_string()) throw Error(ErrorCode::InvalidArgument, "vocabulary entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  return Vocabulary(std::move(tokens));
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i] == token) return static_cast<TokenId>(i);
  }
  return std::nullopt;
}

bool Vocabulary::covers(char ch) const { return covered_[static_cast<unsigned char>(ch)]; }

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t best_len = 0;
    TokenId best = 0;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      const auto& t = tokens_[i];
      if (t.size() > best_len && text.compare(pos, t.size(), t) == 0) {
        best_len = t.size();
        best = static_cast<TokenId>(i);
      }
    }
    if (best_len == 0) {
      throw Error(ErrorCode::InvalidArgument, "no token covers offset " + std::to_string(pos) + " of '" +
                                                  std::string(text) + "'");
    }
    ids.push_back(best);
    pos += best_len;
  }
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (auto id : ids) out += token(id);
  return out;
}

// ---------------------------------------------------------------------------
// Grammar

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::FunctionName: return "FunctionName";
    case Phase::OpenParen: return "OpenParen";
    case Phase::Value: return "Value";
    case Phase::Separator: return "Separator";
    case Phase::EndMarker: return "EndMarker";
    case Phase::Done: return "Done";
  }
  return "?";
}

CallGrammar::CallGrammar(std::shared_ptr<const FunctionRegistry> registry) : registry_(std::move(registry)) {
  auto names = registry_->names();
  for (const auto& n : names) names_.insert(n);
  name_prefixes_ = PrefixSet::build(names);
}

bool DecodeState::Cursor::feed(char ch, const CallGrammar& grammar) {
  switch (phase) {
    case Phase::FunctionName:
      if (ch == '(') {
        if (!name_cursor.at_word()) return false;
        schema = grammar.registry().find(name);
        arg_index = 0;
        if (schema->args.empty()) {
          phase = Phase::OpenParen;
        } else {
          phase = Phase::Value;
          value.emplace(schema->args[0].type);
        }
        return true;
      }
      if (!name_cursor.advance(ch)) return false;
      name.push_back(ch);
      return true;

    case Phase::OpenParen:
      if (ch != ')') return false;
      phase = Phase::EndMarker;
      marker_pos = 0;
      return true;

    case Phase::Value: {
      const bool was_complete = value->complete();
      value->feed(ch);
      if (value->viable()) return true;
      if (!was_complete) return false;
      const std::size_t arity = schema->args.size();
      if (ch == ',' && arg_index + 1 < arity) {
        ++arg_index;
        value.emplace(schema->args[arg_index].type);
        phase = Phase::Separator;
        return true;
      }
      if (ch == ')' && arg_index + 1 == arity) {
        value.reset();
        phase = Phase::EndMarker;
        marker_pos = 0;
        return true;
      }
      return false;
    }

    case Phase::Separator:
      if (ch == ' ') return true;
      value->feed(ch);
      if (!value->viable()) return false;
      phase = Phase::Value;
      return true;

    case Phase::EndMarker:
      if (kEndMarker[marker_pos] != ch) return false;
      if (++marker_pos == kEndMarker.size()) phase = Phase::Done;
      return true;

    case Phase::Done:
      return false;
  }
  return false;
}

bool DecodeState::Cursor::feed(std::string_view chars, const CallGrammar& grammar) {
  for (char ch : chars) {
    if (!feed(ch, grammar)) return false;
  }
  return true;
}

namespace {

std::string missing_characters(const FunctionRegistry& registry, const Vocabulary& vocab) {
  std::set<char> missing;
  auto need = [&](std::string_view chars) {
    for (char ch : chars) {
      if (!vocab.covers(ch)) missing.insert(ch);
    }
  };
  auto need_any = [&](std::string_view options) {
    for (char ch : options) {
      if (vocab.covers(ch)) return;
    }
    missing.insert(options.front());
  };
  need("()");
  need(kEndMarker);
  for (const auto& f : registry.functions()) {
    need(f.name);
    if (f.args.size() > 1) need(",");
    for (const auto& arg : f.args) {
      switch (arg.type.kind()) {
        case ArgKind::String: need("'"); break;
        case ArgKind::Integer: need_any("0123456789"); break;
        case ArgKind::Float:
          need_any("0123456789");
          need(".");
          break;
        case ArgKind::Boolean: {
          bool t = std::all_of(std::begin("True"), std::end("True") - 1, [&](char c) { return vocab.covers(c); });
          if (!t) need("False");
          break;
        }
        case ArgKind::Enum: {
          need("'");
          const auto& members = arg.type.enum_values();
          bool any = std::any_of(members.begin(), members.end(), [&](const std::string& m) {
            return std::all_of(m.begin(), m.end(), [&](char c) { return vocab.covers(c); });
          });
          if (!any) need(members.front());
          break;
        }
        case ArgKind::Dict: need("{}"); break;
      }
    }
  }
  return std::string(missing.begin(), missing.end());
}

}  // namespace

DecodeState new_session(std::shared_ptr<const FunctionRegistry> registry, std::shared_ptr<const Vocabulary> vocab,
                        MaskStrategy strategy) {
  if (!registry || !vocab) throw Error(ErrorCode::InvalidArgument, "registry and vocabulary are required");
  std::string missing = missing_characters(*registry, *vocab);
  if (!missing.empty()) {
    throw Error(ErrorCode::UnspellableRegistry, "no token contains the character(s) \"" + missing + "\"");
  }
  DecodeState state;
  state.grammar_ = std::make_shared<const CallGrammar>(std::move(registry));
  state.vocab_ = std::move(vocab);
  state.strategy_ = strategy;
  state.cursor_.name_cursor = state.grammar_->names().root_cursor();
  return state;
}

DecodeState new_session(const FunctionRegistry& registry, const Vocabulary& vocab, MaskStrategy strategy) {
  return new_session(std::make_shared<const FunctionRegistry>(registry), std::make_shared<const Vocabulary>(vocab),
                     strategy);
}

MaskVector compute_mask(const DecodeState& state) {
  if (state.done()) throw Error(ErrorCode::ConstraintDeadlock, "decode is already complete");
  const auto& tokens = state.vocab_->tokens();
  const CallGrammar& grammar = *state.grammar_;
  MaskVector mask(tokens.size(), false);
  const bool indexed = state.strategy_ == MaskStrategy::Indexed && state.cursor_.phase == Phase::FunctionName;
  std::string candidate;
  bool any = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& token = tokens[i];
    bool ok;
    if (indexed && token.find('(') == std::string::npos) {
      candidate.assign(state.cursor_.name);
      candidate.append(token);
      ok = grammar.name_prefixes().contains_prefix(candidate);
    } else {
      DecodeState::Cursor probe = state.cursor_;
      ok = probe.feed(token, grammar);
    }
    if (ok) {
      mask.set(i, true);
      any = true;
    }
  }
  if (!any) {
    throw Error(ErrorCode::ConstraintDeadlock, "every token is masked after \"" + state.char_stream_ + "\"");
  }
  return mask;
}

DecodeState step(DecodeState state, TokenId token) {
  if (token >= state.vocab_->size()) {
    throw Error(ErrorCode::MaskedTokenStep, "token id " + std::to_string(token) + " is outside the vocabulary");
  }
  const std::string& text = state.vocab_->token(token);
  if (!state.cursor_.feed(text, *state.grammar_)) {
    throw Error(ErrorCode::MaskedTokenStep,
                "token \"" + text + "\" is masked after \"" + state.char_stream_ + "\"");
  }
  state.emitted_.push_back(token);
  state.char_stream_ += text;
  return state;
}

// ---------------------------------------------------------------------------
// Traces

std::string distribution_digest(std::span<const double> dist) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (double p : dist) {
    std::uint64_t bits;
    std::memcpy(&bits, &p, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      hash ^= (bits >> (8 * b)) & 0xffu;
      hash *= 0x100000001b3ull;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string DecodeTrace::to_jsonl(const Vocabulary& vocab) const {
  std::string out;
  for (const auto& s : steps) {
    nlohmann::ordered_json rec;
    rec["step"] = s.step;
    rec["dist_digest"] = distribution_digest(s.dist);
    rec["mask_cardinality"] = s.mask.unmasked_count();
    rec["chosen"] = s.chosen;
    rec["token"] = vocab.token(s.chosen);
    rec["phase"] = s.phase ? phase_name(*s.phase) : std::string_view("Unconstrained");
    rec["chosen_raw"] = s.chosen_raw;
    rec["chosen_prob"] = s.chosen_prob;
    rec["fallback"] = s.zero_mass_fallback;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decode loops

namespace {

std::vector<double> query_model(const LanguageModel& lm, std::span<const TokenId> context, std::size_t vocab_size) {
  std::vector<double> dist = lm.next_distribution(context);
  if (dist.size() != vocab_size) {
    throw Error(ErrorCode::LengthMismatch, "model returned " + std::to_string(dist.size()) +
                                               " probabilities for a vocabulary of " + std::to_string(vocab_size));
  }
  check_distribution(dist);
  return dist;
}

void require_budget(std::size_t max_tokens) {
  if (max_tokens == 0) throw Error(ErrorCode::InvalidArgument, "max_tokens must be at least 1");
}

}  // namespace

DecodeResult decode_greedy(const LanguageModel& lm, DecodeState state, std::size_t max_tokens) {
  require_budget(max_tokens);
  DecodeResult result;
  result.trace.masked = true;
  const std::size_t vocab_size = state.vocabulary().size();
  for (std::size_t t = 0; t < max_tokens && !state.done(); ++t) {
    TraceStep rec;
    rec.step = t;
    rec.phase = state.phase();
    rec.dist = query_model(lm, state.emitted(), vocab_size);
    rec.mask = compute_mask(state);
    MaskedDistribution masked = apply_mask(rec.dist, rec.mask);
    rec.chosen = static_cast<TokenId>(masked.chosen);
    rec.chosen_raw = masked.raw[masked.chosen];
    rec.chosen_prob = masked.renormalized[masked.chosen];
    rec.zero_mass_fallback = masked.zero_mass_fallback;
    state = step(std::move(state), rec.chosen);
    result.trace.steps.push_back(std::move(rec));
  }
  result.text = state.char_stream();
  if (!state.done()) {
    throw Error(ErrorCode::BudgetExhausted,
                "no complete call within " + std::to_string(max_tokens) + " tokens: \"" + result.text + "\"");
  }
  result.call = parse_call(result.text, state.registry());
  return result;
}

UnmaskedResult decode_unmasked(const LanguageModel& lm, const DecodeState& state, std::size_t max_tokens) {
  require_budget(max_tokens);
  UnmaskedResult result;
  result.trace.masked = false;
  const Vocabulary& vocab = state.vocabulary();
  std::vector<TokenId> context = state.emitted();
  result.text = state.char_stream();
  MaskVector full(vocab.size(), true);
  for (std::size_t t = 0; t < max_tokens; ++t) {
    TraceStep rec;
    rec.step = t;
    rec.dist = query_model(lm, context, vocab.size());
    rec.mask = full;
    rec.chosen = static_cast<TokenId>(argmax(rec.dist));
    rec.chosen_raw = rec.dist[rec.chosen];
    rec.chosen_prob = rec.dist[rec.chosen];
    context.push_back(rec.chosen);
    result.text += vocab.token(rec.chosen);
    result.trace.steps.push_back(std::move(rec));
    if (result.text.find(kEndMarker) != std::string::npos) return result;
  }
  throw Error(ErrorCode::BudgetExhausted, "end marker not produced within " + std::to_string(max_tokens) +
                                              " tokens: \"" + result.text + "\"");
}

DecodeTrace decode_forced(const LanguageModel& lm, DecodeState state, std::span<const TokenId> gold) {
  DecodeTrace trace;
  trace.masked = true;
  const std::size_t vocab_size = state.vocabulary().size();
  for (std::size_t t = 0; t < gold.size(); ++t) {
    TraceStep rec;
    rec.step = t;
    rec.phase = state.phase();
    rec.dist = query_model(lm, state.emitted(), vocab_size);
    rec.mask = compute_mask(state);
    MaskedDistribution masked = apply_mask(rec.dist, rec.mask);
    rec.chosen = static_cast<TokenId>(masked.chosen);
    rec.chosen_raw = masked.raw[masked.chosen];
    rec.chosen_prob = masked.renormalized[masked.chosen];
    rec.zero_mass_fallback = masked.zero_mass_fallback;
    state = step(std::move(state), gold[t]);
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace callmask
