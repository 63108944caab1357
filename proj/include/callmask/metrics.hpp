#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "callmask/decoder.hpp"
#include "callmask/mask.hpp"

namespace callmask {

/// One prediction step: model distribution ŷ, one-hot label at `gold`, the
/// mask in force (size 0 means nothing masked) and the chosen index.
struct StepRecord {
  std::vector<double> dist;
  std::size_t gold = 0;
  MaskVector mask;
  std::size_t chosen = 0;
};

/// −log ŷ_gold. Throws Error(ZeroProbabilityGold).
double loss_unmasked(const StepRecord& rec);

/// Cross-entropy of the gold label under the masked, renormalized
/// distribution: −log(ŷ_gold / Σ_{j∈V1} ŷ_j). Evaluated as
/// loss_unmasked + log1p(−m), m the masked-out mass, so a full mask gives
/// exactly loss_unmasked and any m > 0 gives a strictly smaller value.
/// Throws GoldMasked or ZeroProbabilityGold.
double loss_masked(const StepRecord& rec);

/// The restricted sum Σ_{i∈V1} −y_i log ŷ_i taken literally. With a one-hot
/// label inside V1 it always equals loss_unmasked.
double loss_masked_literal(const StepRecord& rec);

/// 1 iff the argmax (ties: lowest index) of the raw or masked distribution
/// is the gold index. Throws Error(GoldMasked) for a masked gold when masked.
int precision_indicator(const StepRecord& rec, bool masked);

struct Counterexample {
  std::size_t trial = 0;
  std::vector<double> dist;
  std::vector<std::size_t> unmasked;
  std::size_t gold = 0;
  double masked_value = 0.0;
  double unmasked_value = 0.0;
  std::string reason;
};

struct TheoremReport {
  std::string name;
  std::size_t checks = 0;
  std::size_t strict_checks = 0;  // trials where a strict inequality was required
  std::vector<Counterexample> violations;

  bool passed() const { return violations.empty(); }
  std::string to_json() const;
};

using LossFunction = std::function<double(const StepRecord&)>;

/// Random distributions and masks (gold always unmasked). Asserts
/// loss_masked ≤ loss_unmasked everywhere and strict inequality whenever the
/// masked-out mass exceeds 1e-12. `masked_loss` is replaceable for fault
/// injection.
TheoremReport theorem_loss_check(std::size_t trials, std::size_t vocab_size, std::uint64_t seed,
                                 const LossFunction& masked_loss = loss_masked);

using PrecisionFunction = std::function<int(const StepRecord&, bool)>;

/// Exhaustive over every gold and every mask containing it, for each
/// vocabulary size in [min_size, max_size] (≤ 8), over a lattice of
/// distributions on the simplex with at least `min_grid` points. Asserts
/// masked precision ≥ unmasked precision and that restricting the support to
/// a set containing the argmax leaves the argmax unchanged.
TheoremReport theorem_precision_check(std::size_t min_size, std::size_t max_size, std::size_t min_grid = 1000,
                                      const PrecisionFunction& precision = precision_indicator);

/// Lattice points of the probability simplex in `dims` dimensions with the
/// smallest denominator giving at least `min_points` points (one point when
/// dims == 1).
std::vector<std::vector<double>> simplex_grid(std::size_t dims, std::size_t min_points);

struct SequenceReport {
  double mean_masked_loss = 0.0;
  double mean_unmasked_loss = 0.0;
  std::vector<int> precision_masked;
  std::vector<int> precision_unmasked;
  bool exact_match = false;  // every masked step chose the gold token
};

/// Aggregates the per-step quantities of a trace against the gold tokens.
/// Throws Error(LengthMismatch) when lengths differ or the trace is empty.
SequenceReport sequence_report(const DecodeTrace& trace, std::span<const TokenId> gold);

std::vector<StepRecord> step_records(const DecodeTrace& trace, std::span<const TokenId> gold);

}  // namespace callmask
