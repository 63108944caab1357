#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "callmask/schema.hpp"

namespace callmask {

struct DataPoint {
  std::vector<FunctionSchema> functions;
  std::string query;
  CallExpression gold;
  std::optional<std::string> thought;
  bool solvable = false;

  friend bool operator==(const DataPoint&, const DataPoint&) = default;
};

/// Throws Error(InvalidArgument) unless the gold function is presented, the
/// sentinel is presented, and `solvable` agrees with the gold function.
void check_datapoint(const DataPoint& point);

struct SamplingConfig {
  std::size_t positive_count = 1;  // M
  std::size_t negative_count = 1;  // N
  std::size_t similar_k = 3;
  std::size_t rank_low = 5;   // 1-indexed, inclusive
  std::size_t rank_high = 10;
  std::size_t positives_per_api = 5;
  std::uint64_t seed = 0;
  /// When the registry is too small for the rank window, draw from the
  /// window's surviving ranks and then from ranks just above it (more
  /// similar) instead of throwing RegistryTooSmall.
  bool small_registry_fallback = false;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Term frequencies of lowercased [a-z0-9]+ words, hashed into a fixed
/// number of buckets.
class TermFrequencyEmbedder final : public EmbeddingProvider {
 public:
  explicit TermFrequencyEmbedder(std::size_t dimensions = 1 << 14);
  std::vector<double> embed(std::string_view text) const override;
  std::size_t dimensions() const { return dimensions_; }

 private:
  std::size_t dimensions_;
};

const EmbeddingProvider& default_embedder();

/// Lowercased [a-z0-9]+ runs of `text`.
std::vector<std::string> word_tokens(std::string_view text);

/// 0 when either vector is all zeros.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct RankedFunction {
  const FunctionSchema* schema = nullptr;
  double similarity = 0.0;
  std::size_t rank = 0;  // 1-indexed
};

/// Every non-sentinel function other than `target`, by descending
/// description similarity; ties broken by name.
std::vector<RankedFunction> rank_by_similarity(const FunctionRegistry& registry, const FunctionSchema& target,
                                               const EmbeddingProvider& embedder = default_embedder());

/// Samples config.similar_k functions uniformly, without replacement, from
/// ranks rank_low..rank_high. Returned in rank order. Throws
/// Error(RegistryTooSmall) when fewer than rank_high candidates exist (unless
/// small_registry_fallback) and Error(InvalidArgument) for a bad window.
std::vector<FunctionSchema> similar_functions(const FunctionRegistry& registry, const FunctionSchema& target,
                                              const SamplingConfig& config,
                                              const EmbeddingProvider& embedder = default_embedder());

/// Sentinel first, then the target and its similar functions in seeded
/// order. Throws Error(TypeMismatch) when gold_args do not fit the target.
DataPoint build_datapoint(const FunctionSchema& target, std::string query, std::vector<Value> gold_args,
                          const FunctionRegistry& registry, const SamplingConfig& config,
                          const EmbeddingProvider& embedder = default_embedder());

/// Gold is no_relevant_function(query). Throws Error(InvalidArgument) when
/// the query cannot be written as a string literal (contains ' or a newline).
DataPoint build_negative(std::string query, std::vector<FunctionSchema> distractors, const SamplingConfig& config);

struct PositiveSpec {
  std::string query;
  CallExpression gold;
  std::optional<std::string> thought;
};

struct NegativeSpec {
  std::string query;
};

inline constexpr std::size_t kEvalCandidates = 4;

/// One entry per spec, solvable and unsolvable interleaved. Every entry
/// presents kEvalCandidates distinct registry functions (the gold function
/// among them for positives) plus the sentinel. Entry i is seeded from
/// (seed, i) alone. Throws UnbalancedSpecs, RegistryTooSmall, UnknownFunction
/// or TypeMismatch.
std::vector<DataPoint> build_eval_set(const FunctionRegistry& registry, std::span<const PositiveSpec> positives,
                                      std::span<const NegativeSpec> negatives, std::uint64_t seed);

/// Training points: positives_per_api positives per API (each with its
/// similar functions) and negatives at the M:N ratio, each negative carrying
/// similar_k + 1 random distractors.
std::vector<DataPoint> build_training_set(const FunctionRegistry& registry,
                                          const std::map<std::string, std::vector<PositiveSpec>>& per_api,
                                          std::span<const NegativeSpec> negatives, const SamplingConfig& config,
                                          const EmbeddingProvider& embedder = default_embedder());

/// Post-hoc audit of training points: counts presented non-target functions
/// whose similarity rank to the gold function lies outside the window.
std::size_t audit_rank_window(const FunctionRegistry& registry, std::span<const DataPoint> points,
                              const SamplingConfig& config, const EmbeddingProvider& embedder = default_embedder());

/// Fabricates `count` positive specs with type-correct random arguments.
/// Queries are synthetic ("Call <name> with ...").
std::vector<PositiveSpec> synthetic_positives(const FunctionRegistry& registry, std::size_t count,
                                              std::uint64_t seed);

/// Fixture corpora. Positives: one `call<TAB>query` per line. Negatives: one
/// query per line. Blank lines and lines starting with '#' are skipped.
std::vector<PositiveSpec> parse_positive_corpus(std::string_view text, const FunctionRegistry& registry);
std::vector<NegativeSpec> parse_negative_corpus(std::string_view text);

// ---------------------------------------------------------------------------
// Prompt

/// The training/inference prompt: preamble, "Function:", the stubs, the
/// query and, when given, "Response:" + call + end marker and "Thought:".
/// Without a response the prompt ends after the query. Throws
/// Error(MissingSentinel) when the sentinel is not among `functions`.
std::string render_prompt(std::span<const FunctionSchema> functions, std::string_view query,
                          std::optional<std::string_view> response = std::nullopt,
                          std::optional<std::string_view> thought = std::nullopt);

std::string render_prompt(const DataPoint& point, bool with_answer);

/// Declared normalization for prompt comparison: CRLF to LF, trailing
/// whitespace stripped from every line, leading and trailing blank lines
/// dropped. Interior blank lines are kept.
std::string normalize_whitespace(std::string_view text);

// ---------------------------------------------------------------------------
// Files

/// One JSON object per line: functions (inline schemas), query, gold (call
/// text without end marker), thought (optional), solvable.
std::string write_dataset(std::span<const DataPoint> points);
std::vector<DataPoint> read_dataset(std::string_view text);
void write_dataset_file(const std::string& path, std::span<const DataPoint> points);
std::vector<DataPoint> read_dataset_file(const std::string& path);

}  // namespace callmask
