#include <cmath>
#include <numeric>

#include "callmask/mock_lm.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace callmask;

namespace {

double sum(const std::vector<double>& d) { return std::accumulate(d.begin(), d.end(), 0.0); }

std::size_t argmax(const std::vector<double>& d) {
  return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

}  // namespace

TEST_CASE("mock spec parsing") {
  auto s = parse_mock_spec("mock:noisy:eps=0.3,seed=7,target=f('a, b=c')");
  CHECK(s.variant == MockVariant::Noisy);
  CHECK(s.epsilon == 0.3);
  CHECK(s.seed == 7);
  CHECK(s.target == "f('a, b=c')");
  CHECK(parse_mock_spec(format_mock_spec(s)).target == s.target);

  auto b = parse_mock_spec("mock:biased:strength=0.8,attractor=send_email('x')");
  CHECK(b.variant == MockVariant::Biased);
  CHECK(b.strength == 0.8);
  CHECK(b.attractor == "send_email('x')");
  CHECK(parse_mock_spec("mock:random").variant == MockVariant::Random);
  CHECK(parse_mock_spec("mock:oracle").variant == MockVariant::Oracle);

  for (const char* bad : {"oracle", "mock:", "mock:gpt", "mock:noisy", "mock:noisy:eps=2", "mock:noisy:eps=x",
                          "mock:biased", "mock:random:seed=-1", "mock:random:colour=red", "mock:biased:strength=1.5,attractor=a"}) {
    CAPTURE(bad);
    CHECK(error_of([&] { parse_mock_spec(bad); }) == ErrorCode::BadSpec);
  }
}

TEST_CASE("mock distributions are normalized and position-indexed") {
  auto vocab = Vocabulary::printable_ascii();
  auto script = vocab.encode("f('x')<nexa_end>");
  OracleLM oracle(script, vocab.size());
  NoisyLM noisy(script, vocab.size(), 0.5, 11);
  RandomLM random(vocab.size(), 3);
  BiasedLM biased(vocab.encode("g()"), vocab.size(), 0.9, 5);
  const LanguageModel* models[] = {&oracle, &noisy, &random, &biased};

  std::vector<TokenId> ctx_a, ctx_b;
  for (std::size_t t = 0; t < script.size() + 5; ++t) {
    for (const auto* m : models) {
      auto d = m->next_distribution(ctx_a);
      REQUIRE(d.size() == vocab.size());
      CHECK(sum(d) == doctest::Approx(1.0).epsilon(1e-12));
      for (double p : d) CHECK(p >= 0.0);
      // Same position, different history: same distribution.
      CHECK(m->next_distribution(ctx_b) == d);
    }
    ctx_a.push_back(static_cast<TokenId>(t % vocab.size()));
    ctx_b.push_back(static_cast<TokenId>((t * 7 + 3) % vocab.size()));
  }
}

TEST_CASE("oracle puts 1-delta on the script") {
  auto vocab = Vocabulary::printable_ascii();
  auto script = vocab.encode("abc");
  OracleLM oracle(script, vocab.size(), 0, 1e-6);
  std::vector<TokenId> ctx;
  for (auto id : script) {
    auto d = oracle.next_distribution(ctx);
    CHECK(d[id] == doctest::Approx(1.0 - 1e-6));
    ctx.push_back(id);
  }
}

TEST_CASE("noisy with epsilon 0 matches the oracle; epsilon 1 always moves top-1") {
  auto vocab = Vocabulary::printable_ascii();
  auto script = vocab.encode("set_alarm(7, 30)<nexa_end>");
  OracleLM oracle(script, vocab.size());
  NoisyLM clean(script, vocab.size(), 0.0, 4);
  NoisyLM loud(script, vocab.size(), 1.0, 4);
  std::vector<TokenId> ctx;
  for (std::size_t t = 0; t < script.size(); ++t) {
    CHECK(clean.next_distribution(ctx) == oracle.next_distribution(ctx));
    auto d = loud.next_distribution(ctx);
    auto top = loud.top_token(t);
    CHECK(argmax(d) == top);
    if (top != script[t]) {
      // The scripted token stays runner-up.
      auto copy = d;
      copy[top] = 0;
      CHECK(argmax(copy) == script[t]);
    }
    ctx.push_back(script[t]);
  }
}

TEST_CASE("noisy corruption rate tracks epsilon") {
  auto vocab = Vocabulary::printable_ascii();
  std::vector<TokenId> script(2000, *vocab.find("a"));
  NoisyLM noisy(script, vocab.size(), 0.3, 99);
  std::size_t moved = 0;
  for (std::size_t t = 0; t < script.size(); ++t) moved += noisy.top_token(t) != script[t];
  // A uniform draw lands on the script token 1/95 of the time.
  double expected = 0.3 * (1.0 - 1.0 / 95.0) * 2000;
  CHECK(std::abs(static_cast<double>(moved) - expected) < 5 * std::sqrt(expected));
}

TEST_CASE("seeds change random weights, same seed reproduces them") {
  RandomLM a(50, 1), b(50, 1), c(50, 2);
  std::vector<TokenId> ctx;
  CHECK(a.next_distribution(ctx) == b.next_distribution(ctx));
  CHECK(a.next_distribution(ctx) != c.next_distribution(ctx));
}

TEST_CASE("make_mock scripts the target and appends the marker") {
  auto vocab = Vocabulary::printable_ascii();
  auto lm = make_mock(parse_mock_spec("mock:oracle"), vocab, std::string_view("f()"));
  std::vector<TokenId> ctx;
  std::string out;
  for (int i = 0; i < 13; ++i) {
    auto id = static_cast<TokenId>(argmax(lm->next_distribution(ctx)));
    out += vocab.token(id);
    ctx.push_back(id);
  }
  CHECK(out == "f()<nexa_end>");
  CHECK(error_of([&] { make_mock(parse_mock_spec("mock:oracle"), vocab); }) == ErrorCode::BadSpec);
  CHECK(make_mock(parse_mock_spec("mock:random:seed=3"), vocab) != nullptr);
}

TEST_CASE("biased mock unmasked spells the attractor") {
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  auto registry = std::make_shared<const FunctionRegistry>(
      load_registry(R"([{"name":"send_emil","description":"d","args":[{"name":"to","type":"string"}]}])"));
  auto spec = parse_mock_spec("mock:biased:attractor=send_email('draft')<nexa_end>");
  auto lm = make_mock(spec, *vocab);
  auto out = decode_unmasked(*lm, new_session(registry, vocab), 200);
  CHECK(out.text == "send_email('draft')<nexa_end>");
}
