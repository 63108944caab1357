#include <map>

#include "callmask/evalharness.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace callmask;

namespace {

std::vector<DataPoint> mixed_eval_set(std::size_t half, std::uint64_t seed) {
  auto registry = load_registry(read_fixture("mixed_registry.json"));
  auto pos = synthetic_positives(registry, half, seed);
  std::vector<NegativeSpec> neg;
  for (std::size_t i = 0; i < half; ++i) neg.push_back({"tell me a fact about number " + std::to_string(i)});
  return build_eval_set(registry, pos, neg, seed);
}

void check_invariants(const ModeReport& r) {
  CHECK(r.outcomes.size() == r.total);
  CHECK(r.correct + r.wrong_function + r.wrong_arguments + r.parse_failure + r.budget_exhausted == r.total);
  std::map<FailureCause, std::size_t> counted;
  std::size_t correct = 0;
  for (const auto& o : r.outcomes) {
    counted[o.cause]++;
    correct += o.correct;
    CHECK(o.correct == (o.cause == FailureCause::None));
  }
  CHECK(correct == r.correct);
  CHECK(counted[FailureCause::ParseFailure] == r.parse_failure);
  CHECK(counted[FailureCause::WrongFunction] == r.wrong_function);
}

class EchoGold final : public TextModel {
 public:
  explicit EchoGold(std::vector<DataPoint> set) : set_(std::move(set)) {}
  std::string complete(std::string_view prompt) override {
    for (const auto& p : set_)
      if (render_prompt(p, false) == prompt) return "  " + render_call_body(p.gold) + "<nexa_end> trailing";
    return "???";
  }

 private:
  std::vector<DataPoint> set_;
};

}  // namespace

TEST_CASE("match_call on text") {
  FunctionRegistry presented({{"send_email", "d", {{"to", ArgType(ArgKind::String)}, {"body", ArgType(ArgKind::String)}}},
                              {"send_emil", "d", {{"to", ArgType(ArgKind::String)}}}});
  auto gold = parse_call("send_email('a', 'b')<nexa_end>", presented);

  CHECK(match_call("send_email('a', 'b')<nexa_end>", gold, MatchMode::Strict, presented).correct);
  CHECK(match_call("send_email('a','b')<nexa_end>", gold, MatchMode::Strict, presented).correct);
  CHECK(match_call("send_email('a', 'c')<nexa_end>", gold, MatchMode::Strict, presented).cause ==
        FailureCause::WrongArguments);
  CHECK(match_call("send_emil('a')<nexa_end>", gold, MatchMode::Strict, presented).cause ==
        FailureCause::WrongFunction);
  CHECK(match_call("send_email('a', 'b'", gold, MatchMode::Strict, presented).cause == FailureCause::ParseFailure);
  CHECK(match_call("send_email(\"a\", 'b')<nexa_end>", gold, MatchMode::Strict, presented).cause ==
        FailureCause::ParseFailure);
  CHECK(match_call("send_email(\"a\", 'b')<nexa_end>", gold, MatchMode::Relaxed, presented).correct);
  CHECK(match_call(" send_email( 'a' ,'b' ) <nexa_end> and more", gold, MatchMode::Relaxed, presented).correct);
  CHECK(match_call("send_email('a', 'b') <nexa_end>", gold, MatchMode::Strict, presented).cause ==
        FailureCause::ParseFailure);
  // Hallucinated name absent from the presented set: still a wrong function.
  CHECK(match_call("send_mail('a', 'b')<nexa_end>", gold, MatchMode::Strict, presented).cause ==
        FailureCause::WrongFunction);
  CHECK(match_call(gold, gold).correct);
}

TEST_CASE("relaxed_normalize") {
  CHECK(relaxed_normalize(" f( \"a b\" , 1 )<nexa_end>junk") == "f('a b',1)");
  CHECK(relaxed_normalize("f('x  y')") == "f('x  y')");
}

TEST_CASE("oracle mock scores perfectly masked and unmasked") {
  auto set = mixed_eval_set(10, 1);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  auto factory = mock_factory(parse_mock_spec("mock:oracle"), vocab);
  auto report = run_paired(set, *vocab, factory, {});
  REQUIRE(report.sections.size() == 2);
  for (const auto& s : report.sections) {
    CHECK(s.accuracy() == 1.0);
    check_invariants(s);
  }
  CHECK(report.sections[0].label == "masked");
  CHECK(report.sections[1].label == "unmasked");
}

TEST_CASE("noisy mock: masked never loses and never fails to parse") {
  auto set = mixed_eval_set(20, 2);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  for (double eps : {0.1, 0.3}) {
    MockSpec spec;
    spec.variant = MockVariant::Noisy;
    spec.epsilon = eps;
    spec.seed = 5;
    EvalOptions options;
    options.max_tokens = 4096;
    auto report = run_paired(set, *vocab, mock_factory(spec, vocab), options);
    const auto& masked = report.sections[0];
    const auto& unmasked = report.sections[1];
    check_invariants(masked);
    check_invariants(unmasked);
    CHECK(masked.parse_failure == 0);
    CHECK(masked.correct >= unmasked.correct);
    for (std::size_t i = 0; i < set.size(); ++i) CHECK((masked.outcomes[i].correct || !unmasked.outcomes[i].correct));
  }
}

TEST_CASE("parallel runs match sequential runs") {
  auto set = mixed_eval_set(8, 3);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  auto factory = mock_factory(parse_mock_spec("mock:noisy:eps=0.4,seed=2"), vocab);
  EvalOptions one;
  one.max_tokens = 4096;
  EvalOptions four = one;
  four.jobs = 4;
  auto a = run_paired(set, *vocab, factory, one);
  auto b = run_paired(set, *vocab, factory, four);
  CHECK(a.to_json(true) == b.to_json(true));
  four.strategy = MaskStrategy::Simulation;
  CHECK(run_eval(set, *vocab, factory, four).outcomes.size() == set.size());
}

TEST_CASE("budget exhaustion is reported, not thrown") {
  auto set = mixed_eval_set(2, 4);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  EvalOptions options;
  options.max_tokens = 3;
  auto r = run_eval(set, *vocab, mock_factory(parse_mock_spec("mock:oracle"), vocab), options);
  CHECK(r.budget_exhausted == r.total);
  check_invariants(r);
  CHECK(error_of([&] { run_eval({}, *vocab, mock_factory(parse_mock_spec("mock:oracle"), vocab), options); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("text eval through a TextModel") {
  auto set = mixed_eval_set(5, 6);
  EchoGold model(set);
  auto strict = run_text_eval(set, model, MatchMode::Strict);
  auto relaxed = run_text_eval(set, model, MatchMode::Relaxed);
  CHECK(strict.parse_failure == strict.total);
  CHECK(relaxed.accuracy() == 1.0);
  check_invariants(strict);
}

TEST_CASE("report rendering") {
  auto set = mixed_eval_set(3, 7);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  auto report = run_paired(set, *vocab, mock_factory(parse_mock_spec("mock:oracle"), vocab), {});
  auto table = report.to_table();
  CHECK(table.find("masked") != std::string::npos);
  CHECK(table.find("unmasked") != std::string::npos);
  auto json = report.to_json();
  CHECK(json.find("\"accuracy\"") != std::string::npos);
  CHECK(json.find("\"outcomes\"") == std::string::npos);
  CHECK(report.to_json(true).find("\"outcomes\"") != std::string::npos);
}
