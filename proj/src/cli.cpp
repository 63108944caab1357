#include "callmask/cli.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "callmask/dataset.hpp"
#include "callmask/error.hpp"
#include "callmask/evalharness.hpp"
#include "callmask/mock_lm.hpp"
#include "callmask/remote.hpp"

namespace callmask::cli {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
}

std::shared_ptr<const Vocabulary> load_vocab(const std::string& path) {
  if (path.empty()) return std::make_shared<const Vocabulary>(Vocabulary::printable_ascii());
  return std::make_shared<const Vocabulary>(Vocabulary::from_json(slurp(path)));
}

MatchMode parse_mode(const std::string& text) { return text == "relaxed" ? MatchMode::Relaxed : MatchMode::Strict; }

struct DecodeFlags {
  std::string registry, lm, query, vocab, trace;
  bool masked = true;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::optional<std::uint64_t> seed;
};

int cmd_decode(const DecodeFlags& f, bool masked_given, std::ostream& out, std::ostream& err) {
  auto registry = std::make_shared<const FunctionRegistry>(load_registry_file(f.registry));
  auto vocab = load_vocab(f.vocab);

  if (f.lm.starts_with("remote:")) {
    if (masked_given && f.masked) {
      err << "error: a remote text model exposes no logits; masked decoding needs --masked=false\n";
      return kExitInput;
    }
    RemoteTextModel model(parse_remote_spec(f.lm));
    auto text = model.complete(render_prompt(registry->functions(), f.query));
    out << text << "\n";
    if (!f.trace.empty()) write_text(f.trace, model.transcripts_jsonl(), out);
    return kExitOk;
  }

  auto spec = parse_mock_spec(f.lm);
  if (f.seed) spec.seed = *f.seed;
  auto lm = make_mock(spec, *vocab);
  auto state = new_session(registry, vocab);
  try {
    if (f.masked) {
      auto result = decode_greedy(*lm, state, f.max_tokens);
      out << result.text << "\n";
      if (!f.trace.empty()) write_text(f.trace, result.trace.to_jsonl(*vocab), out);
    } else {
      auto result = decode_unmasked(*lm, state, f.max_tokens);
      out << result.text << "\n";
      try {
        parse_call(result.text, *registry);
      } catch (const Error& e) {
        err << "warning: unmasked output is not a valid call: " << e.what() << "\n";
      }
      if (!f.trace.empty()) write_text(f.trace, result.trace.to_jsonl(*vocab), out);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConstraintDeadlock || e.code() == ErrorCode::BudgetExhausted) {
      err << "decode failed: " << e.what() << "\n";
      return kExitDecode;
    }
    throw;
  }
  return kExitOk;
}

struct EvalFlags {
  std::string dataset, lm, mode = "strict", vocab, output;
  bool masked = true;
  bool paired = false;
  bool outcomes = false;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const auto dataset = read_dataset_file(f.dataset);
  AccuracyReport report;
  if (f.lm.starts_with("remote:")) {
    RemoteTextModel model(parse_remote_spec(f.lm));
    report.sections.push_back(run_text_eval(dataset, model, parse_mode(f.mode)));
  } else {
    auto spec = parse_mock_spec(f.lm);
    if (f.seed) spec.seed = *f.seed;
    auto vocab = load_vocab(f.vocab);
    auto factory = mock_factory(spec, vocab);
    EvalOptions options;
    options.masked = f.masked;
    options.mode = parse_mode(f.mode);
    options.max_tokens = f.max_tokens;
    options.jobs = f.jobs;
    if (f.paired) {
      report = run_paired(dataset, *vocab, factory, options);
    } else {
      report.sections.push_back(run_eval(dataset, *vocab, factory, options));
    }
  }
  out << report.to_table();
  if (!f.output.empty()) write_text(f.output, report.to_json(f.outcomes) + "\n", out);
  return kExitOk;
}

struct TheoremFlags {
  std::size_t trials = 10000;
  std::size_t vocab_size = 32;
  std::size_t grid = 1000;
  std::uint64_t seed = 0;
  bool exhaustive = false;
  std::string output;
};

int cmd_theorems(const TheoremFlags& f, const Hooks& hooks, std::ostream& out, std::ostream& err) {
  std::size_t low = 4, high = 8;
  if (f.exhaustive) {
    if (f.vocab_size == 0 || f.vocab_size > 8) {
      err << "error: --exhaustive enumerates masks and needs --vocab-size between 1 and 8\n";
      return kExitInput;
    }
    low = 1;
    high = f.vocab_size;
  }
  const auto loss = theorem_loss_check(f.trials, f.vocab_size, f.seed, hooks.masked_loss ? hooks.masked_loss : loss_masked);
  const auto precision =
      theorem_precision_check(low, high, f.grid, hooks.precision ? hooks.precision : precision_indicator);

  bool ok = true;
  for (const auto* r : {&loss, &precision}) {
    out << r->name << ": " << r->checks << " checks, " << r->violations.size() << " violations\n";
    if (!r->passed()) {
      ok = false;
      out << r->to_json() << "\n";
    }
  }
  if (!f.output.empty()) {
    write_text(f.output, "[" + loss.to_json() + ",\n" + precision.to_json() + "]\n", out);
  }
  return ok ? kExitOk : kExitViolation;
}

struct DatasetFlags {
  std::string registry, positives, negatives, output = "-", kind = "eval";
  std::uint64_t seed = 0;
  SamplingConfig sampling;
};

int cmd_dataset(const DatasetFlags& f, std::ostream& out, std::ostream& err) {
  const auto registry = load_registry_file(f.registry);
  const auto positives = parse_positive_corpus(slurp(f.positives), registry);
  const auto negatives = parse_negative_corpus(slurp(f.negatives));
  std::vector<DataPoint> points;
  try {
    if (f.kind == "eval") {
      points = build_eval_set(registry, positives, negatives, f.seed);
    } else {
      std::map<std::string, std::vector<PositiveSpec>> per_api;
      for (const auto& p : positives) per_api[p.gold.function].push_back(p);
      auto config = f.sampling;
      config.seed = f.seed;
      points = build_training_set(registry, per_api, negatives, config);
      const auto violations = audit_rank_window(registry, points, config);
      err << "rank audit: " << violations << " functions outside ranks " << config.rank_low << "-"
          << config.rank_high << "\n";
      if (violations != 0 && !config.small_registry_fallback) return kExitInput;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnbalancedSpecs || e.code() == ErrorCode::RegistryTooSmall) {
      err << "error: " << e.what() << "\n";
      return kExitInput;
    }
    throw;
  }
  write_text(f.output, write_dataset(points), out);
  if (f.output != "-") err << "wrote " << points.size() << " entries to " << f.output << "\n";
  return kExitOk;
}

int cmd_trie(const std::string& registry_path, const std::string& prefix, std::ostream& out) {
  const auto registry = load_registry_file(registry_path);
  Trie trie;
  for (const auto& name : registry.names()) trie.insert(name);
  const auto probe = trie.probe(prefix);
  for (const auto& word : trie.search(prefix)) out << word << "\n";
  out << "# prefix '" << prefix << "': " << (probe.found ? "viable" : "dead") << ", " << probe.nodes_visited
      << " nodes visited\n";
  return kExitOk;
}

int cmd_prompt(const std::string& dataset_path, std::size_t index, bool answer, std::ostream& out) {
  const auto dataset = read_dataset_file(dataset_path);
  if (index >= dataset.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "index " + std::to_string(index) + " out of range; dataset has " + std::to_string(dataset.size()));
  }
  out << render_prompt(dataset[index], answer) << "\n";
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Constrained decoding of function calls against a registry."};
  app.name("callmask");
  app.require_subcommand(1);

  DecodeFlags decode;
  auto* dec = app.add_subcommand("decode", "Decode one call with a model");
  dec->add_option("--registry", decode.registry, "Registry JSON")->required()->check(CLI::ExistingFile);
  dec->add_option("--lm", decode.lm, "mock:<variant>:<params> or remote:<endpoint>")->required();
  dec->add_option("--query", decode.query, "User query (sent to remote models)");
  auto* dec_masked = dec->add_option("--masked", decode.masked, "Apply the conditional mask")->default_val(true);
  dec->add_option("--max-tokens", decode.max_tokens)->default_val(kDefaultMaxTokens);
  dec->add_option("--vocab", decode.vocab, "Vocabulary JSON (default: printable ASCII characters)")
      ->check(CLI::ExistingFile);
  dec->add_option("--trace", decode.trace, "Write the step trace as JSONL ('-' for stdout)");
  dec->add_option("--seed", decode.seed, "Override the mock seed");

  EvalFlags eval;
  auto* ev = app.add_subcommand("eval", "Exact-match accuracy over a dataset");
  ev->add_option("--dataset", eval.dataset)->required()->check(CLI::ExistingFile);
  ev->add_option("--lm", eval.lm)->required();
  ev->add_option("--masked", eval.masked)->default_val(true);
  ev->add_flag("--paired", eval.paired, "Report masked and unmasked sections");
  ev->add_option("--mode", eval.mode)->check(CLI::IsMember({"strict", "relaxed"}))->default_val("strict");
  ev->add_option("--max-tokens", eval.max_tokens)->default_val(kDefaultMaxTokens);
  ev->add_option("--jobs", eval.jobs)->default_val(1)->check(CLI::PositiveNumber);
  ev->add_option("--vocab", eval.vocab)->check(CLI::ExistingFile);
  ev->add_option("--output", eval.output, "Write the JSON report here");
  ev->add_flag("--outcomes", eval.outcomes, "Include per-entry outcomes in the JSON report");
  ev->add_option("--seed", eval.seed, "Override the mock seed");

  TheoremFlags theorems;
  auto* th = app.add_subcommand("theorems", "Randomized and exhaustive checks of the masking bounds");
  th->add_option("--trials", theorems.trials)->default_val(10000)->check(CLI::PositiveNumber);
  th->add_option("--vocab-size", theorems.vocab_size)->default_val(32)->check(CLI::PositiveNumber);
  th->add_option("--grid", theorems.grid, "Minimum simplex grid size")->default_val(1000);
  th->add_option("--seed", theorems.seed)->default_val(0);
  th->add_flag("--exhaustive", theorems.exhaustive, "Precision check over sizes 1..vocab-size");
  th->add_option("--output", theorems.output);

  DatasetFlags ds;
  auto* dsc = app.add_subcommand("dataset", "Build an evaluation or training set");
  dsc->add_option("--registry", ds.registry)->required()->check(CLI::ExistingFile);
  dsc->add_option("--positives", ds.positives, "Lines of call<TAB>query")->required()->check(CLI::ExistingFile);
  dsc->add_option("--negatives", ds.negatives, "Lines of unsolvable queries")->required()->check(CLI::ExistingFile);
  dsc->add_option("--kind", ds.kind)->check(CLI::IsMember({"eval", "train"}))->default_val("eval");
  dsc->add_option("--output", ds.output)->default_val("-");
  dsc->add_option("--seed", ds.seed)->default_val(0);
  dsc->add_option("--similar-k", ds.sampling.similar_k)->default_val(3);
  dsc->add_option("--rank-low", ds.sampling.rank_low)->default_val(5);
  dsc->add_option("--rank-high", ds.sampling.rank_high)->default_val(10);
  dsc->add_option("--positives-per-api", ds.sampling.positives_per_api)->default_val(5);
  dsc->add_option("--ratio-m", ds.sampling.positive_count)->default_val(1)->check(CLI::PositiveNumber);
  dsc->add_option("--ratio-n", ds.sampling.negative_count)->default_val(1);
  dsc->add_flag("--small-registry-fallback", ds.sampling.small_registry_fallback);

  std::string trie_registry, trie_prefix;
  auto* tr = app.add_subcommand("trie", "List registered names under a prefix");
  tr->add_option("--registry", trie_registry)->required()->check(CLI::ExistingFile);
  tr->add_option("--prefix", trie_prefix)->default_val("");

  std::string prompt_dataset;
  std::size_t prompt_index = 0;
  bool prompt_answer = false;
  auto* pr = app.add_subcommand("prompt", "Render the prompt of one dataset entry");
  pr->add_option("--dataset", prompt_dataset)->required()->check(CLI::ExistingFile);
  pr->add_option("--index", prompt_index)->default_val(0);
  pr->add_flag("--answer", prompt_answer, "Append Response and Thought");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*dec) return cmd_decode(decode, dec_masked->count() > 0, out, err);
    if (*ev) return cmd_eval(eval, out);
    if (*th) return cmd_theorems(theorems, hooks, out, err);
    if (*dsc) return cmd_dataset(ds, out, err);
    if (*tr) return cmd_trie(trie_registry, trie_prefix, out);
    if (*pr) return cmd_prompt(prompt_dataset, prompt_index, prompt_answer, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace callmask::cli
