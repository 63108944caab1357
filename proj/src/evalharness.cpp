#include "callmask/evalharness.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>

#include "callmask/error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace callmask {

std::string_view mode_name(MatchMode mode) { return mode == MatchMode::Strict ? "strict" : "relaxed"; }

std::string_view cause_name(FailureCause cause) {
  switch (cause) {
    case FailureCause::None: return "none";
    case FailureCause::WrongFunction: return "wrong_function";
    case FailureCause::WrongArguments: return "wrong_arguments";
    case FailureCause::ParseFailure: return "parse_failure";
    case FailureCause::BudgetExhausted: return "budget_exhausted";
  }
  return "none";
}

MatchResult match_call(const CallExpression& predicted, const CallExpression& gold) {
  if (predicted.function != gold.function) return {false, FailureCause::WrongFunction};
  if (predicted.arguments != gold.arguments) return {false, FailureCause::WrongArguments};
  return {true, FailureCause::None};
}

std::string relaxed_normalize(std::string_view text) {
  if (auto at = text.find(kEndMarker); at != std::string_view::npos) text = text.substr(0, at);
  std::string out;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote) {
        out += '\'';
        quote = 0;
      } else {
        out += c;
      }
    } else if (c == '\'' || c == '"') {
      out += '\'';
      quote = c;
    } else if (c != ' ' && c != '\t' && c != '\r' && c != '\n') {
      out += c;
    }
  }
  return out;
}

MatchResult match_call(std::string_view predicted, const CallExpression& gold, MatchMode mode,
                       const FunctionRegistry& presented) {
  std::string text = mode == MatchMode::Relaxed ? relaxed_normalize(predicted) : std::string(predicted);
  CallExpression untyped;
  try {
    untyped = parse_call_syntax(text);
  } catch (const Error&) {
    return {false, FailureCause::ParseFailure};
  }
  if (untyped.function != gold.function) return {false, FailureCause::WrongFunction};
  try {
    return match_call(parse_call(text, presented), gold);
  } catch (const Error&) {
    return {false, FailureCause::WrongArguments};
  }
}

ModelFactory mock_factory(MockSpec spec, std::shared_ptr<const Vocabulary> vocab) {
  // Validate once up front so a bad spec fails before any work starts.
  if (spec.variant == MockVariant::Biased) make_mock(spec, *vocab);
  return [spec = std::move(spec), vocab = std::move(vocab)](const DataPoint& entry, std::size_t index) {
    MockSpec local = spec;
    local.seed = detail::mix(spec.seed, index);
    return make_mock(local, *vocab, render_call(entry.gold));
  };
}

namespace {

EntryOutcome evaluate_entry(const DataPoint& entry, std::size_t index, const Vocabulary& vocab,
                            const ModelFactory& factory, const EvalOptions& options) {
  EntryOutcome out;
  const FunctionRegistry presented(entry.functions);
  const auto lm = factory(entry, index);
  const auto state = new_session(presented, vocab, options.strategy);
  try {
    if (options.masked) {
      auto result = decode_greedy(*lm, state, options.max_tokens);
      out.text = std::move(result.text);
      auto match = options.mode == MatchMode::Strict ? match_call(result.call, entry.gold)
                                                     : match_call(out.text, entry.gold, options.mode, presented);
      out.correct = match.correct;
      out.cause = match.cause;
    } else {
      auto result = decode_unmasked(*lm, state, options.max_tokens);
      out.text = std::move(result.text);
      auto match = match_call(out.text, entry.gold, options.mode, presented);
      out.correct = match.correct;
      out.cause = match.cause;
    }
  } catch (const Error& e) {
    out.detail = e.what();
    out.cause = e.code() == ErrorCode::BudgetExhausted ? FailureCause::BudgetExhausted : FailureCause::ParseFailure;
  }
  return out;
}

void tally(ModeReport& report) {
  report.total = report.outcomes.size();
  for (const auto& o : report.outcomes) {
    if (o.correct) ++report.correct;
    switch (o.cause) {
      case FailureCause::None: break;
      case FailureCause::WrongFunction: ++report.wrong_function; break;
      case FailureCause::WrongArguments: ++report.wrong_arguments; break;
      case FailureCause::ParseFailure: ++report.parse_failure; break;
      case FailureCause::BudgetExhausted: ++report.budget_exhausted; break;
    }
  }
}

}  // namespace

ModeReport run_eval(std::span<const DataPoint> dataset, const Vocabulary& vocab, const ModelFactory& factory,
                    const EvalOptions& options) {
  if (dataset.empty()) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  ModeReport report;
  report.label = options.masked ? "masked" : "unmasked";
  report.mode = options.mode;
  report.outcomes.resize(dataset.size());

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, dataset.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (std::size_t i = next++; i < dataset.size() && !failed; i = next++) {
      try {
        report.outcomes[i] = evaluate_entry(dataset[i], i, vocab, factory, options);
      } catch (...) {
        // Errors outside decoding (bad vocabulary, unspellable registry) abort the run.
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  tally(report);
  return report;
}

AccuracyReport run_paired(std::span<const DataPoint> dataset, const Vocabulary& vocab, const ModelFactory& factory,
                          EvalOptions options) {
  AccuracyReport report;
  options.masked = true;
  report.sections.push_back(run_eval(dataset, vocab, factory, options));
  options.masked = false;
  report.sections.push_back(run_eval(dataset, vocab, factory, options));
  return report;
}

ModeReport run_text_eval(std::span<const DataPoint> dataset, TextModel& model, MatchMode mode) {
  if (dataset.empty()) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  ModeReport report;
  report.label = "remote";
  report.mode = mode;
  for (const auto& entry : dataset) {
    EntryOutcome out;
    out.text = model.complete(render_prompt(entry, false));
    const FunctionRegistry presented(entry.functions);
    auto match = match_call(out.text, entry.gold, mode, presented);
    out.correct = match.correct;
    out.cause = match.cause;
    report.outcomes.push_back(std::move(out));
  }
  tally(report);
  return report;
}

std::string AccuracyReport::to_json(bool with_outcomes) const {
  nlohmann::ordered_json doc;
  doc["sections"] = nlohmann::ordered_json::array();
  for (const auto& s : sections) {
    nlohmann::ordered_json j;
    j["label"] = s.label;
    j["mode"] = mode_name(s.mode);
    j["total"] = s.total;
    j["correct"] = s.correct;
    j["accuracy"] = s.accuracy();
    j["failures"] = {{"wrong_function", s.wrong_function},
                     {"wrong_arguments", s.wrong_arguments},
                     {"parse_failure", s.parse_failure},
                     {"budget_exhausted", s.budget_exhausted}};
    if (with_outcomes) {
      j["outcomes"] = nlohmann::ordered_json::array();
      for (const auto& o : s.outcomes) {
        nlohmann::ordered_json e;
        e["correct"] = o.correct;
        e["cause"] = cause_name(o.cause);
        e["text"] = o.text;
        if (!o.detail.empty()) e["detail"] = o.detail;
        j["outcomes"].push_back(std::move(e));
      }
    }
    doc["sections"].push_back(std::move(j));
  }
  return doc.dump(2);
}

std::string AccuracyReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %-8s %6s %8s %9s %9s %10s %6s %7s\n", "decode", "match", "total", "correct",
                "accuracy", "wrong_fn", "wrong_args", "parse", "budget");
  out += line;
  for (const auto& s : sections) {
    std::snprintf(line, sizeof line, "%-10s %-8s %6zu %8zu %9.4f %9zu %10zu %6zu %7zu\n", s.label.c_str(),
                  std::string(mode_name(s.mode)).c_str(), s.total, s.correct, s.accuracy(), s.wrong_function,
                  s.wrong_arguments, s.parse_failure, s.budget_exhausted);
    out += line;
  }
  return out;
}

}  // namespace callmask
