#include "callmask/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "callmask/error.hpp"
#include "json.hpp"
#include "rng.hpp"
#include "schema_json.hpp"

namespace callmask {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kPreamble =
    "You are an assistant, and you need to call find appropriate functions according to the query of the users. "
    "Firstly, find the relevant functions, then get the function arguments by understanding the user's query. "
    "The following functions are available for you to fetch further data to answer user questions:";

bool is_sentinel(const FunctionSchema& f) { return f.name == kSentinelName; }

std::vector<const FunctionSchema*> ordinary_functions(const FunctionRegistry& registry) {
  std::vector<const FunctionSchema*> out;
  for (const auto& f : registry.functions()) {
    if (!is_sentinel(f)) out.push_back(&f);
  }
  return out;
}

void check_gold(const FunctionSchema& target, const std::vector<Value>& args) {
  if (args.size() != target.args.size()) {
    throw Error(ErrorCode::TypeMismatch, target.name + " takes " + std::to_string(target.args.size()) +
                                             " arguments, gold has " + std::to_string(args.size()));
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!value_matches(args[i], target.args[i].type)) {
      throw Error(ErrorCode::TypeMismatch, "gold argument '" + target.args[i].name + "' of " + target.name +
                                               " is not a " + std::string(kind_name(target.args[i].type.kind())));
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string_view> corpus_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

void check_datapoint(const DataPoint& point) {
  auto presented = [&](std::string_view name) {
    return std::any_of(point.functions.begin(), point.functions.end(),
                       [&](const FunctionSchema& f) { return f.name == name; });
  };
  if (!presented(kSentinelName)) throw Error(ErrorCode::InvalidArgument, "datapoint does not present the sentinel");
  if (!presented(point.gold.function)) {
    throw Error(ErrorCode::InvalidArgument, "gold function " + point.gold.function + " is not presented");
  }
  if (point.solvable != (point.gold.function != kSentinelName)) {
    throw Error(ErrorCode::InvalidArgument, "solvable flag disagrees with the gold function");
  }
}

// ---------------------------------------------------------------------------
// Embeddings

TermFrequencyEmbedder::TermFrequencyEmbedder(std::size_t dimensions) : dimensions_(dimensions) {
  if (dimensions == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be positive");
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current += c;
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<double> TermFrequencyEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dimensions_, 0.0);
  for (const auto& w : word_tokens(text)) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : w) h = (h ^ c) * 0x100000001b3ULL;
    v[h % dimensions_] += 1.0;
  }
  return v;
}

const EmbeddingProvider& default_embedder() {
  static const TermFrequencyEmbedder embedder;
  return embedder;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "embedding sizes differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// Retrieval

std::vector<RankedFunction> rank_by_similarity(const FunctionRegistry& registry, const FunctionSchema& target,
                                               const EmbeddingProvider& embedder) {
  const auto anchor = embedder.embed(target.description);
  std::vector<RankedFunction> ranked;
  for (const auto* f : ordinary_functions(registry)) {
    if (f->name == target.name) continue;
    ranked.push_back({f, cosine_similarity(anchor, embedder.embed(f->description)), 0});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedFunction& a, const RankedFunction& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.schema->name < b.schema->name;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;
  return ranked;
}

std::vector<FunctionSchema> similar_functions(const FunctionRegistry& registry, const FunctionSchema& target,
                                              const SamplingConfig& config, const EmbeddingProvider& embedder) {
  if (config.rank_low == 0 || config.rank_low > config.rank_high) {
    throw Error(ErrorCode::InvalidArgument, "rank window must satisfy 1 <= low <= high");
  }
  const std::size_t window = config.rank_high - config.rank_low + 1;
  if (config.similar_k > window) {
    throw Error(ErrorCode::InvalidArgument, "similar_k exceeds the rank window");
  }
  if (config.similar_k == 0) return {};

  const auto ranked = rank_by_similarity(registry, target, embedder);
  std::vector<std::size_t> pool;  // indices into ranked
  if (ranked.size() >= config.rank_high) {
    for (std::size_t r = config.rank_low; r <= config.rank_high; ++r) pool.push_back(r - 1);
  } else if (!config.small_registry_fallback) {
    throw Error(ErrorCode::RegistryTooSmall, "need " + std::to_string(config.rank_high) +
                                                 " candidates besides the target, registry has " +
                                                 std::to_string(ranked.size()));
  } else {
    for (std::size_t r = config.rank_low; r <= ranked.size(); ++r) pool.push_back(r - 1);
    for (std::size_t r = std::min(config.rank_low, ranked.size() + 1); r > 1 && pool.size() < config.similar_k; --r) {
      pool.push_back(r - 2);
    }
  }

  detail::Rng rng(detail::mix(config.seed, 0x51a));
  rng.shuffle(pool);
  pool.resize(std::min(pool.size(), config.similar_k));
  std::sort(pool.begin(), pool.end());
  std::vector<FunctionSchema> out;
  for (auto i : pool) out.push_back(*ranked[i].schema);
  return out;
}

// ---------------------------------------------------------------------------
// Datapoints

DataPoint build_datapoint(const FunctionSchema& target, std::string query, std::vector<Value> gold_args,
                          const FunctionRegistry& registry, const SamplingConfig& config,
                          const EmbeddingProvider& embedder) {
  check_gold(target, gold_args);
  std::vector<FunctionSchema> picked = similar_functions(registry, target, config, embedder);
  picked.push_back(target);
  detail::Rng rng(detail::mix(config.seed, 0xda7a));
  rng.shuffle(picked);

  DataPoint point;
  point.functions.push_back(sentinel_schema());
  for (auto& f : picked) point.functions.push_back(std::move(f));
  point.query = std::move(query);
  point.gold = CallExpression{target.name, std::move(gold_args)};
  point.solvable = true;
  return point;
}

DataPoint build_negative(std::string query, std::vector<FunctionSchema> distractors, const SamplingConfig& config) {
  if (query.find('\'') != std::string::npos || query.find('\n') != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "unsolvable query cannot contain a quote or newline: " + query);
  }
  std::erase_if(distractors, is_sentinel);
  detail::Rng rng(detail::mix(config.seed, 0x4e6));
  rng.shuffle(distractors);

  DataPoint point;
  point.functions.push_back(sentinel_schema());
  for (auto& f : distractors) point.functions.push_back(std::move(f));
  point.gold = CallExpression{std::string(kSentinelName), {Value::string(query)}};
  point.query = std::move(query);
  point.solvable = false;
  return point;
}

std::vector<DataPoint> build_eval_set(const FunctionRegistry& registry, std::span<const PositiveSpec> positives,
                                      std::span<const NegativeSpec> negatives, std::uint64_t seed) {
  if (positives.size() != negatives.size()) {
    throw Error(ErrorCode::UnbalancedSpecs, std::to_string(positives.size()) + " solvable vs " +
                                                std::to_string(negatives.size()) + " unsolvable specs");
  }
  const auto pool = ordinary_functions(registry);
  if (pool.size() < kEvalCandidates) {
    throw Error(ErrorCode::RegistryTooSmall, "evaluation entries need " + std::to_string(kEvalCandidates) +
                                                 " functions besides the sentinel");
  }

  std::vector<DataPoint> out;
  out.reserve(positives.size() * 2);
  for (std::size_t i = 0; i < positives.size() * 2; ++i) {
    detail::Rng rng(detail::mix(seed, i));
    std::vector<const FunctionSchema*> candidates = pool;
    rng.shuffle(candidates);
    const bool positive = i % 2 == 0;
    const auto& spec_index = i / 2;

    DataPoint point;
    if (positive) {
      const auto& spec = positives[spec_index];
      const FunctionSchema* target = registry.find(spec.gold.function);
      if (!target || is_sentinel(*target)) {
        throw Error(ErrorCode::UnknownFunction, "positive spec calls unregistered function " + spec.gold.function);
      }
      check_gold(*target, spec.gold.arguments);
      std::erase(candidates, target);
      candidates.resize(kEvalCandidates - 1);
      candidates.insert(candidates.begin() + static_cast<std::ptrdiff_t>(rng.below(kEvalCandidates)), target);
      point.query = spec.query;
      point.gold = spec.gold;
      point.thought = spec.thought;
      point.solvable = true;
    } else {
      const auto& spec = negatives[spec_index];
      if (spec.query.find('\'') != std::string::npos || spec.query.find('\n') != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "unsolvable query cannot contain a quote or newline: " + spec.query);
      }
      candidates.resize(kEvalCandidates);
      point.query = spec.query;
      point.gold = CallExpression{std::string(kSentinelName), {Value::string(spec.query)}};
      point.solvable = false;
    }
    point.functions.push_back(sentinel_schema());
    for (const auto* f : candidates) point.functions.push_back(*f);
    out.push_back(std::move(point));
  }
  return out;
}

std::vector<DataPoint> build_training_set(const FunctionRegistry& registry,
                                          const std::map<std::string, std::vector<PositiveSpec>>& per_api,
                                          std::span<const NegativeSpec> negatives, const SamplingConfig& config,
                                          const EmbeddingProvider& embedder) {
  if (config.positive_count == 0) throw Error(ErrorCode::InvalidArgument, "positive_count must be positive");
  std::vector<DataPoint> positives;
  std::uint64_t counter = 0;
  for (const auto& [api, specs] : per_api) {
    const FunctionSchema* target = registry.find(api);
    if (!target || is_sentinel(*target)) throw Error(ErrorCode::UnknownFunction, "no registered function " + api);
    if (specs.size() < config.positives_per_api) {
      throw Error(ErrorCode::UnbalancedSpecs, api + " has " + std::to_string(specs.size()) + " queries, need " +
                                                  std::to_string(config.positives_per_api));
    }
    for (std::size_t i = 0; i < config.positives_per_api; ++i) {
      if (specs[i].gold.function != api) {
        throw Error(ErrorCode::InvalidArgument, "query listed under " + api + " calls " + specs[i].gold.function);
      }
      SamplingConfig local = config;
      local.seed = detail::mix(config.seed, counter++);
      auto point = build_datapoint(*target, specs[i].query, specs[i].gold.arguments, registry, local, embedder);
      point.thought = specs[i].thought;
      positives.push_back(std::move(point));
    }
  }

  const std::size_t wanted = (positives.size() * config.negative_count) / config.positive_count;
  if (negatives.size() < wanted) {
    throw Error(ErrorCode::UnbalancedSpecs, "need " + std::to_string(wanted) + " unsolvable queries, have " +
                                                std::to_string(negatives.size()));
  }
  const auto pool = ordinary_functions(registry);
  std::vector<DataPoint> out;
  std::size_t p = 0, n = 0;
  // Interleave so any prefix of the set keeps roughly the M:N ratio.
  while (p < positives.size() || n < wanted) {
    for (std::size_t k = 0; k < config.positive_count && p < positives.size(); ++k) out.push_back(std::move(positives[p++]));
    for (std::size_t k = 0; k < config.negative_count && n < wanted; ++k, ++n) {
      SamplingConfig local = config;
      local.seed = detail::mix(config.seed, counter++);
      detail::Rng rng(local.seed);
      auto shuffled = pool;
      rng.shuffle(shuffled);
      shuffled.resize(std::min(shuffled.size(), config.similar_k + 1));
      std::vector<FunctionSchema> distractors;
      for (const auto* f : shuffled) distractors.push_back(*f);
      out.push_back(build_negative(negatives[n].query, std::move(distractors), local));
    }
  }
  return out;
}

std::size_t audit_rank_window(const FunctionRegistry& registry, std::span<const DataPoint> points,
                              const SamplingConfig& config, const EmbeddingProvider& embedder) {
  std::size_t violations = 0;
  for (const auto& point : points) {
    if (!point.solvable) continue;
    const FunctionSchema* target = registry.find(point.gold.function);
    if (!target) {
      ++violations;
      continue;
    }
    const auto ranked = rank_by_similarity(registry, *target, embedder);
    for (const auto& f : point.functions) {
      if (is_sentinel(f) || f.name == target->name) continue;
      auto it = std::find_if(ranked.begin(), ranked.end(),
                             [&](const RankedFunction& r) { return r.schema->name == f.name; });
      if (it == ranked.end() || it->rank < config.rank_low || it->rank > config.rank_high) ++violations;
    }
  }
  return violations;
}

// ---------------------------------------------------------------------------
// Synthetic and fixture corpora

namespace {

constexpr std::string_view kWords[] = {"alpha", "bravo", "delta", "report", "photo", "paris", "tokyo",
                                       "budget", "meeting", "https://example.com/p/42", "blue", "weekly"};

Value random_value(const ArgType& type, detail::Rng& rng, int depth) {
  switch (type.kind()) {
    case ArgKind::String: return Value::string(std::string(kWords[rng.below(std::size(kWords))]));
    case ArgKind::Integer: return Value::integer(static_cast<std::int64_t>(rng.below(2000)) - 500);
    case ArgKind::Float: {
      auto whole = static_cast<std::int64_t>(rng.below(200)) - 50;
      auto frac = rng.below(100);
      return Value::floating_text(std::to_string(whole) + "." + std::to_string(frac));
    }
    case ArgKind::Boolean: return Value::boolean(rng.below(2) == 1);
    case ArgKind::Enum: {
      const auto& members = type.enum_values();
      return Value::enumeration(members[rng.below(members.size())]);
    }
    case ArgKind::Dict: {
      DictValue entries;
      const std::size_t n = rng.below(3);
      for (std::size_t i = 0; i < n; ++i) {
        std::string key = "k" + std::to_string(i);
        if (depth < 2 && rng.below(4) == 0) {
          entries.push_back({key, random_value(ArgType(ArgKind::Dict), rng, depth + 1)});
        } else {
          static const ArgKind kinds[] = {ArgKind::String, ArgKind::Integer, ArgKind::Float, ArgKind::Boolean};
          entries.push_back({key, random_value(ArgType(kinds[rng.below(4)]), rng, depth + 1)});
        }
      }
      return Value::dict(std::move(entries));
    }
  }
  return Value::string("x");
}

}  // namespace

std::vector<PositiveSpec> synthetic_positives(const FunctionRegistry& registry, std::size_t count,
                                              std::uint64_t seed) {
  const auto pool = ordinary_functions(registry);
  if (pool.empty() && count > 0) throw Error(ErrorCode::RegistryTooSmall, "registry has no callable functions");
  std::vector<PositiveSpec> out;
  for (std::size_t i = 0; i < count; ++i) {
    detail::Rng rng(detail::mix(seed ^ 0x9051, i));
    const FunctionSchema& f = *pool[rng.below(pool.size())];
    PositiveSpec spec;
    spec.gold.function = f.name;
    spec.query = "Call " + f.name;
    for (std::size_t a = 0; a < f.args.size(); ++a) {
      spec.gold.arguments.push_back(random_value(f.args[a].type, rng, 1));
      spec.query += (a == 0 ? " with " : ", ") + f.args[a].name + " " + render_value(spec.gold.arguments.back());
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<PositiveSpec> parse_positive_corpus(std::string_view text, const FunctionRegistry& registry) {
  std::vector<PositiveSpec> out;
  for (auto line : corpus_lines(text)) {
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, "positive corpus line lacks a tab: " + std::string(line));
    }
    PositiveSpec spec;
    spec.gold = parse_call(line.substr(0, tab), registry);
    spec.query = std::string(line.substr(tab + 1));
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<NegativeSpec> parse_negative_corpus(std::string_view text) {
  std::vector<NegativeSpec> out;
  for (auto line : corpus_lines(text)) out.push_back({std::string(line)});
  return out;
}

// ---------------------------------------------------------------------------
// Prompt

std::string render_prompt(std::span<const FunctionSchema> functions, std::string_view query,
                          std::optional<std::string_view> response, std::optional<std::string_view> thought) {
  if (std::none_of(functions.begin(), functions.end(), is_sentinel)) {
    throw Error(ErrorCode::MissingSentinel, "prompt functions must include " + std::string(kSentinelName));
  }
  std::string out(kPreamble);
  out += "\n\nFunction:\n\n";
  for (const auto& f : functions) {
    out += render_stub(f);
    out += "\n\n\n";
  }
  out += query;
  if (response) {
    out += "\n\nResponse:";
    out += *response;
    if (!response->ends_with(kEndMarker)) out += kEndMarker;
  }
  if (thought) {
    out += "\n\nThought:";
    out += *thought;
  }
  return out;
}

std::string render_prompt(const DataPoint& point, bool with_answer) {
  if (!with_answer) return render_prompt(point.functions, point.query);
  std::optional<std::string_view> thought;
  if (point.thought) thought = *point.thought;
  return render_prompt(point.functions, point.query, render_call(point.gold), thought);
}

std::string normalize_whitespace(std::string_view text) {
  std::vector<std::string> lines;
  std::string current;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      while (!current.empty() && (current.back() == ' ' || current.back() == '\t' || current.back() == '\r')) {
        current.pop_back();
      }
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current += text[i];
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  std::string out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (i > first) out += '\n';
    out += lines[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

std::string write_dataset(std::span<const DataPoint> points) {
  std::string out;
  for (const auto& p : points) {
    check_datapoint(p);
    ordered_json line;
    line["functions"] = ordered_json::array();
    for (const auto& f : p.functions) line["functions"].push_back(detail::schema_json(f));
    line["query"] = p.query;
    line["gold"] = render_call_body(p.gold);
    if (p.thought) line["thought"] = *p.thought;
    line["solvable"] = p.solvable;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<DataPoint> read_dataset(std::string_view text) {
  std::vector<DataPoint> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "dataset line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
    if (!obj.is_object() || !obj.contains("functions") || !obj["functions"].is_array() || !obj.contains("query") ||
        !obj["query"].is_string() || !obj.contains("gold") || !obj["gold"].is_string() ||
        !obj.contains("solvable") || !obj["solvable"].is_boolean()) {
      throw Error(ErrorCode::ParseError, where + "expected functions, query, gold and solvable");
    }
    DataPoint p;
    for (const auto& f : obj["functions"]) p.functions.push_back(detail::schema_from_json_object(f));
    p.query = obj["query"].get<std::string>();
    const FunctionRegistry presented(p.functions);
    p.gold = parse_call(obj["gold"].get<std::string>(), presented);
    if (obj.contains("thought")) {
      if (!obj["thought"].is_string()) throw Error(ErrorCode::ParseError, where + "thought must be a string");
      p.thought = obj["thought"].get<std::string>();
    }
    p.solvable = obj["solvable"].get<bool>();
    check_datapoint(p);
    out.push_back(std::move(p));
  }
  return out;
}

void write_dataset_file(const std::string& path, std::span<const DataPoint> points) {
  const auto text = write_dataset(points);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::vector<DataPoint> read_dataset_file(const std::string& path) { return read_dataset(read_file(path)); }

}  // namespace callmask
