#include <deque>
#include <numeric>

#include "callmask/decoder.hpp"
#include "callmask/mock_lm.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace callmask;

namespace {

std::shared_ptr<const FunctionRegistry> registry_of(const std::string& fixture) {
  return std::make_shared<const FunctionRegistry>(load_registry(read_fixture(fixture)));
}

std::shared_ptr<const Vocabulary> chars() { return std::make_shared<const Vocabulary>(Vocabulary::printable_ascii()); }

FunctionSchema fn(std::string name, std::vector<ArgSpec> args) { return {std::move(name), "Does a thing.", std::move(args)}; }
ArgSpec arg(std::string name, ArgType type) { return {std::move(name), std::move(type), "An argument.", ""}; }

// Puts all mass on one token at every step.
class ConstantLM final : public LanguageModel {
 public:
  ConstantLM(std::size_t n, TokenId favourite) : n_(n), favourite_(favourite) {}
  std::vector<double> next_distribution(std::span<const TokenId>) const override {
    std::vector<double> d(n_, 0.0);
    d[favourite_] = 1.0;
    return d;
  }

 private:
  std::size_t n_;
  TokenId favourite_;
};

TokenId id_of(const Vocabulary& v, std::string_view tok) { return *v.find(tok); }

// Depth-first search for any continuation that reaches Done, preferring
// tokens that close things. Returns the finished text or "" when none is
// found within the node budget.
std::string complete(const DecodeState& state, const std::vector<TokenId>& order, std::size_t& budget) {
  if (state.done()) return state.char_stream();
  if (budget == 0) return "";
  --budget;
  MaskVector mask;
  try {
    mask = compute_mask(state);
  } catch (const Error&) {
    return "";
  }
  for (TokenId t : order) {
    if (!mask.allowed(t)) continue;
    auto text = complete(step(state, t), order, budget);
    if (!text.empty()) return text;
  }
  return "";
}

}  // namespace

TEST_CASE("new_session") {
  auto s = new_session(registry_of("ds_eg1_registry.json"), chars());
  CHECK(s.phase() == Phase::FunctionName);
  CHECK(s.emitted().empty());

  FunctionRegistry empty;
  auto only = new_session(empty, Vocabulary::printable_ascii());
  auto mask = compute_mask(only);
  const auto& v = only.vocabulary();
  CHECK(mask.allowed(id_of(v, "n")));
  CHECK(mask.unmasked_count() == 1);

  std::vector<std::string> no_paren;
  const auto printable = Vocabulary::printable_ascii();
  for (const auto& t : printable.tokens())
    if (t != "(") no_paren.push_back(t);
  CHECK(error_of([&] { new_session(empty, Vocabulary(no_paren)); }) == ErrorCode::UnspellableRegistry);
}

TEST_CASE("FunctionName mask matches a per-character name oracle") {
  FunctionRegistry registry({fn("send_emil", {arg("to", ArgType(ArgKind::String))}), fn("search", {})});
  auto vocab = Vocabulary::printable_ascii();
  auto state = new_session(registry, vocab);
  std::vector<std::string> names = registry.names();
  for (char next : std::string("send_emil(")) {
    auto mask = compute_mask(state);
    for (TokenId i = 0; i < vocab.size(); ++i) {
      std::string candidate = std::string(state.char_stream()) + vocab.token(i);
      bool expected = std::any_of(names.begin(), names.end(), [&](const std::string& n) {
        return (n + "(").starts_with(candidate);
      });
      INFO("prefix '" << state.char_stream() << "' token '" << vocab.token(i) << "'");
      CHECK(mask.allowed(i) == expected);
    }
    state = step(state, id_of(vocab, std::string(1, next)));
  }
  CHECK(state.phase() == Phase::Value);
  CHECK(state.resolved_schema()->name == "send_emil");
}

TEST_CASE("Value phase integer mask") {
  FunctionRegistry registry({fn("set", {arg("n", ArgType(ArgKind::Integer))})});
  auto vocab = Vocabulary::printable_ascii();
  auto state = new_session(registry, vocab);
  for (char c : std::string("set(4")) state = step(state, id_of(vocab, std::string(1, c)));
  auto mask = compute_mask(state);
  CHECK(mask.allowed(id_of(vocab, "2")));
  CHECK(mask.allowed(id_of(vocab, ")")));
  CHECK_FALSE(mask.allowed(id_of(vocab, "a")));
  CHECK_FALSE(mask.allowed(id_of(vocab, ",")));
  CHECK(mask.unmasked_count() == 11);
}

TEST_CASE("step walks the phases of the template call") {
  auto vocab = chars();
  auto state = new_session(registry_of("ds_eg1_registry.json"), vocab);
  std::string gold = "insta_download_url('https://www.instagram.com/p/CODEinstantiate123/')<nexa_end>";
  std::size_t i = 0;
  for (; i < gold.size(); ++i) {
    state = step(state, vocab->encode(gold.substr(i, 1)).front());
    if (gold.substr(0, i + 1) == "insta_download_url(") {
      CHECK(state.phase() == Phase::Value);
      CHECK(state.arg_index() == 0);
      CHECK(state.value_matcher()->kind() == ArgKind::String);
    }
    if (gold.substr(0, i + 1).ends_with("/')")) CHECK(state.phase() == Phase::EndMarker);
  }
  CHECK(state.done());
  CHECK(state.char_stream() == gold);
  CHECK(error_of([&] { compute_mask(state); }) == ErrorCode::ConstraintDeadlock);

  auto fresh = new_session(registry_of("ds_eg1_registry.json"), vocab);
  CHECK(error_of([&] { step(fresh, *vocab->find("x")); }) == ErrorCode::MaskedTokenStep);
}

TEST_CASE("zero-argument calls and separators") {
  auto vocab = chars();
  auto registry = registry_of("mixed_registry.json");
  for (std::string text : {"take_photo()<nexa_end>", "set_alarm(7,   30)<nexa_end>",
                           "convert_currency(2.5, 'USD', 'JPY')<nexa_end>",
                           "create_event('x', {'a': {'b': 1}, 'c': True})<nexa_end>",
                           "update_settings({}, False)<nexa_end>"}) {
    INFO(text);
    auto state = new_session(registry, vocab);
    for (auto id : vocab->encode(text)) state = step(state, id);
    CHECK(state.done());
    CHECK_NOTHROW(parse_call(state.char_stream(), *registry));
  }
}

TEST_CASE("decode_greedy with the oracle reproduces the template response") {
  auto vocab = chars();
  auto registry = registry_of("ds_eg1_registry.json");
  std::string gold = "insta_download_url('https://www.instagram.com/p/CODEinstantiate123/')<nexa_end>";
  OracleLM lm(vocab->encode(gold), vocab->size());
  auto result = decode_greedy(lm, new_session(registry, vocab));
  CHECK(result.text == gold);
  CHECK(result.call == parse_call(gold, *registry));
  CHECK(result.trace.steps.size() == gold.size());
  CHECK(result.trace.masked);
  auto unmasked = decode_unmasked(lm, new_session(registry, vocab));
  CHECK(unmasked.text == gold);

  auto jsonl = result.trace.to_jsonl(*vocab);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == static_cast<long>(gold.size()));
  CHECK(jsonl.find("\"phase\":\"FunctionName\"") != std::string::npos);
}

TEST_CASE("all mass on a masked token takes the uniform fallback and still terminates") {
  // A newline is legal nowhere in a response. The fallback picks the lowest
  // unmasked id, so closing tokens go first in this vocabulary; with printable
  // order the sentinel's string body would be padded with spaces forever.
  std::vector<std::string> tokens{"'", ")"};
  const auto printable = Vocabulary::printable_ascii();
  for (const auto& t : printable.tokens())
    if (t != "'" && t != ")") tokens.push_back(t);
  tokens.push_back("\n");
  auto vocab = std::make_shared<const Vocabulary>(tokens);
  auto registry = registry_of("ds_eg1_registry.json");
  ConstantLM lm(vocab->size(), *vocab->find("\n"));
  auto result = decode_greedy(lm, new_session(registry, vocab));
  CHECK_NOTHROW(parse_call(result.text, *registry));
  CHECK(std::all_of(result.trace.steps.begin(), result.trace.steps.end(),
                    [](const TraceStep& s) { return s.zero_mass_fallback; }));
}

TEST_CASE("budget exhaustion") {
  auto vocab = chars();
  auto registry = registry_of("ds_eg1_registry.json");
  ConstantLM lm(vocab->size(), *vocab->find("a"));
  CHECK(error_of([&] { decode_unmasked(lm, new_session(registry, vocab), 20); }) == ErrorCode::BudgetExhausted);
  OracleLM oracle(vocab->encode("youtube_downloader('x')<nexa_end>"), vocab->size());
  CHECK(error_of([&] { decode_greedy(oracle, new_session(registry, vocab), 5); }) == ErrorCode::BudgetExhausted);
}

TEST_CASE("random models: masked decodes always parse and name a registered function") {
  auto vocab = chars();
  auto registry = registry_of("mixed_registry.json");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomLM lm(vocab->size(), seed);
    auto result = decode_greedy(lm, new_session(registry, vocab), 4096);
    INFO("seed " << seed << ": " << result.text);
    CHECK(registry->find(result.call.function) != nullptr);
    CHECK(parse_call(result.text, *registry) == result.call);
  }
}

TEST_CASE("property: indexed and simulated masks agree; char_stream tracks emission") {
  auto registry = registry_of("mixed_registry.json");
  std::vector<std::string> tokens = Vocabulary::printable_ascii().tokens();
  for (std::string extra : {"se", "set_", "_a", "al", "arm(", "('", "')", "', '", "),", "<nexa_end>", ")<nexa", "_end>",
                            "Tr", "ue", "{'", "': ", "}}", "US", "D'", "photo()", "12", "3.", ".5"})
    tokens.push_back(extra);
  auto vocab = std::make_shared<const Vocabulary>(tokens);
  std::mt19937_64 rng(5);
  for (int walk = 0; walk < 200; ++walk) {
    auto indexed = new_session(registry, vocab, MaskStrategy::Indexed);
    auto simulated = new_session(registry, vocab, MaskStrategy::Simulation);
    for (int t = 0; t < 300 && !indexed.done(); ++t) {
      auto mi = compute_mask(indexed);
      auto ms = compute_mask(simulated);
      REQUIRE(mi == ms);
      auto ids = mi.unmasked_ids();
      auto pick = static_cast<TokenId>(ids[rng() % ids.size()]);
      indexed = step(indexed, pick);
      simulated = step(simulated, pick);
      CHECK(indexed.char_stream() == vocab->decode(indexed.emitted()));
    }
    if (indexed.done()) CHECK_NOTHROW(parse_call(indexed.char_stream(), *registry));
  }
}

TEST_CASE("property: gold calls are never masked under a boundary-crossing vocabulary") {
  auto registry = registry_of("mixed_registry.json");
  std::vector<std::string> tokens = Vocabulary::printable_ascii().tokens();
  for (std::string extra : {"set", "_alarm(", "('", "')", "', '", "),", "<nexa_end>", ")<nexa_end>", "True)", "{'", "': ",
                            "'}", "}, ", "0,", ", 1", "USD'"})
    tokens.push_back(extra);
  auto vocab = std::make_shared<const Vocabulary>(tokens);
  const std::vector<std::string> golds = {
      "send_email('a@b.c', 'hello there')<nexa_end>", "set_thermostat(-21.75)<nexa_end>",
      "set_alarm(0, 10)<nexa_end>",  "toggle_wifi(True)<nexa_end>",
      "get_weather('Paris', 'imperial')<nexa_end>", "search_flights('LHR', 'SFO', 2)<nexa_end>",
      "create_event('x', {'a': 'b', 'n': {'m': -1.5}})<nexa_end>", "take_photo()<nexa_end>",
      "convert_currency(10.0, 'USD', 'EUR')<nexa_end>", "no_relevant_function('why, oh why?')<nexa_end>"};
  for (const auto& gold : golds) {
    INFO(gold);
    auto state = new_session(registry, vocab);
    for (auto id : vocab->encode(gold)) {
      REQUIRE(compute_mask(state).allowed(id));
      state = step(state, id);
    }
    CHECK(state.done());
  }
}

TEST_CASE("soundness: every unmasked token at every shallow state can still finish") {
  FunctionRegistry registry({fn("ab", {arg("n", ArgType(ArgKind::Integer))}),
                             fn("abc", {arg("s", ArgType(ArgKind::String)), arg("f", ArgType(ArgKind::Boolean))}),
                             fn("b", {}), fn("e", {arg("c", ArgType::enumeration({"US", "UK", "USA"}))}),
                             fn("x", {arg("r", ArgType(ArgKind::Float))})});
  std::vector<std::string> tokens;
  for (char c : std::string("abcex(),' 1-.<n_d>TruFlsUSAKovift")) tokens.emplace_back(1, c);
  auto vocab = std::make_shared<const Vocabulary>(tokens);
  auto reg = std::make_shared<const FunctionRegistry>(registry);

  // Closing characters first so the completion search goes straight to Done.
  std::vector<TokenId> order;
  for (std::string_view c : {"'", ")", "<", "n", "e", "x", "a", "_", "d", ">", ".", "1", "U", "S", "T", "r", "u",
                             "b", "c", "(", ",", " ", "-", "A", "K", "F", "l", "s", "o", "v", "i", "f", "t"})
    order.push_back(*vocab->find(c));
  REQUIRE(order.size() == vocab->size());

  std::deque<DecodeState> frontier{new_session(reg, vocab)};
  std::size_t checked = 0;
  while (!frontier.empty()) {
    auto state = frontier.front();
    frontier.pop_front();
    if (state.done()) continue;
    auto mask = compute_mask(state);
    for (auto id : mask.unmasked_ids()) {
      auto next = step(state, static_cast<TokenId>(id));
      std::size_t budget = 2000;
      auto text = complete(next, order, budget);
      INFO("prefix '" << next.char_stream() << "'");
      REQUIRE_FALSE(text.empty());
      CHECK_NOTHROW(parse_call(text, registry));
      ++checked;
      if (next.emitted().size() < 7) frontier.push_back(std::move(next));
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("vocabulary encode/decode") {
  Vocabulary v({"a", "ab", "abc", "d"});
  CHECK(v.encode("abcd") == std::vector<TokenId>{2, 3});
  CHECK(v.decode(v.encode("abab")) == "abab");
  CHECK(error_of([&] { v.encode("z"); }) == ErrorCode::InvalidArgument);
  CHECK(error_of([] { Vocabulary({"a", ""}); }) == ErrorCode::InvalidArgument);
  auto j = Vocabulary::from_json(R"(["x", "yz"])");
  CHECK(j.size() == 2);
  CHECK(j.covers('z'));
}

TEST_CASE("distribution digest is stable and sensitive") {
  std::vector<double> a{0.5, 0.5}, b{0.5, 0.5000000001};
  CHECK(distribution_digest(a) == distribution_digest(a));
  CHECK(distribution_digest(a) != distribution_digest(b));
  CHECK(distribution_digest(a).size() == 16);
}
