#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "callmask/decoder.hpp"

namespace callmask {

/// Scripted stand-ins for a fine-tuned model. All of them are position
/// indexed: the distribution at step t depends on t and the seed only, never
/// on what was emitted before. Paired masked/unmasked runs therefore see the
/// same noise at the same positions.
///
/// Past the end of a script every mock falls back to seeded random weights.

/// Mass 1-δ on the scripted token, δ spread evenly over the rest.
class OracleLM final : public LanguageModel {
 public:
  OracleLM(std::vector<TokenId> script, std::size_t vocab_size, std::uint64_t seed = 0, double delta = 1e-6);
  std::vector<double> next_distribution(std::span<const TokenId> context) const override;

 private:
  std::vector<TokenId> script_;
  std::size_t vocab_size_;
  std::uint64_t seed_;
  double delta_;
};

/// The oracle, except that with probability ε per step the top-1 mass moves
/// to a uniformly drawn token. The scripted token then keeps `runner_up` mass
/// so it stays second.
class NoisyLM final : public LanguageModel {
 public:
  NoisyLM(std::vector<TokenId> script, std::size_t vocab_size, double epsilon, std::uint64_t seed,
          double delta = 1e-6, double runner_up = 0.05);
  std::vector<double> next_distribution(std::span<const TokenId> context) const override;
  /// The token holding the top-1 mass at step t.
  TokenId top_token(std::size_t t) const;

 private:
  std::vector<TokenId> script_;
  std::size_t vocab_size_;
  double epsilon_;
  std::uint64_t seed_;
  double delta_;
  double runner_up_;
};

/// Independent random weights at every step.
class RandomLM final : public LanguageModel {
 public:
  RandomLM(std::size_t vocab_size, std::uint64_t seed);
  std::vector<double> next_distribution(std::span<const TokenId> context) const override;

 private:
  std::size_t vocab_size_;
  std::uint64_t seed_;
};

/// Puts `strength` on the attractor's token at each step and spreads the
/// rest by random weights. Models a system that "knows" a different spelling.
class BiasedLM final : public LanguageModel {
 public:
  BiasedLM(std::vector<TokenId> attractor, std::size_t vocab_size, double strength, std::uint64_t seed);
  std::vector<double> next_distribution(std::span<const TokenId> context) const override;

 private:
  std::vector<TokenId> attractor_;
  std::size_t vocab_size_;
  double strength_;
  std::uint64_t seed_;
};

enum class MockVariant { Oracle, Noisy, Random, Biased };

/// Parsed form of `mock:<variant>[:<params>]`. Params are comma-separated
/// key=value pairs; `target=` and `attractor=` take the rest of the string,
/// so they must come last.
///
///   mock:oracle[:target=<call>]
///   mock:noisy:eps=<ε>[,seed=<n>][,target=<call>]
///   mock:random[:seed=<n>]
///   mock:biased:attractor=<text>  (with optional strength=<s>,seed=<n> first)
struct MockSpec {
  MockVariant variant = MockVariant::Oracle;
  double epsilon = 0.0;
  double strength = 0.9;
  std::uint64_t seed = 0;
  std::optional<std::string> target;
  std::string attractor;
};

/// Throws Error(BadSpec).
MockSpec parse_mock_spec(std::string_view spec);
std::string format_mock_spec(const MockSpec& spec);

/// Builds the model. Oracle and noisy mocks script spec.target when set,
/// else `target_text` (typically the gold call of a dataset entry). Throws
/// Error(BadSpec) when a scripted mock has no target.
std::unique_ptr<LanguageModel> make_mock(const MockSpec& spec, const Vocabulary& vocab,
                                         std::optional<std::string_view> target_text = std::nullopt);

}  // namespace callmask
