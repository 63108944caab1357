#include "callmask/metrics.hpp"

#include <cmath>
#include <random>

#include "callmask/error.hpp"
#include "json.hpp"

namespace callmask {

namespace {

bool unmasked(const StepRecord& rec, std::size_t i) { return rec.mask.size() == 0 || rec.mask.allowed(i); }

void check_record(const StepRecord& rec) {
  if (rec.gold >= rec.dist.size()) throw Error(ErrorCode::InvalidArgument, "gold index outside the distribution");
  if (rec.mask.size() != 0 && rec.mask.size() != rec.dist.size()) {
    throw Error(ErrorCode::LengthMismatch, "mask and distribution sizes differ");
  }
}

}  // namespace

double loss_unmasked(const StepRecord& rec) {
  check_record(rec);
  const double p = rec.dist[rec.gold];
  if (!(p > 0.0)) throw Error(ErrorCode::ZeroProbabilityGold, "gold token has probability 0");
  return -std::log(p);
}

double loss_masked(const StepRecord& rec) {
  check_record(rec);
  if (!unmasked(rec, rec.gold)) throw Error(ErrorCode::GoldMasked, "gold token is masked");
  double removed = 0.0;
  for (std::size_t i = 0; i < rec.dist.size(); ++i) {
    if (!unmasked(rec, i)) removed += rec.dist[i];
  }
  return loss_unmasked(rec) + std::log1p(-removed);
}

double loss_masked_literal(const StepRecord& rec) {
  check_record(rec);
  double sum = 0.0;
  for (std::size_t i = 0; i < rec.dist.size(); ++i) {
    if (i == rec.gold && unmasked(rec, i)) sum += loss_unmasked(rec);
  }
  return sum;
}

int precision_indicator(const StepRecord& rec, bool masked) {
  check_record(rec);
  if (!masked || rec.mask.size() == 0) return argmax(rec.dist) == rec.gold ? 1 : 0;
  if (!rec.mask.allowed(rec.gold)) throw Error(ErrorCode::GoldMasked, "gold token is masked");
  return apply_mask(rec.dist, rec.mask).chosen == rec.gold ? 1 : 0;
}

std::string TheoremReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["theorem"] = name;
  doc["checks"] = checks;
  doc["strict_checks"] = strict_checks;
  doc["passed"] = passed();
  doc["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations) {
    nlohmann::ordered_json c;
    c["trial"] = v.trial;
    c["reason"] = v.reason;
    c["gold"] = v.gold;
    c["masked"] = v.masked_value;
    c["unmasked"] = v.unmasked_value;
    c["unmasked_ids"] = v.unmasked;
    c["dist"] = v.dist;
    doc["violations"].push_back(std::move(c));
  }
  return doc.dump(2);
}

TheoremReport theorem_loss_check(std::size_t trials, std::size_t vocab_size, std::uint64_t seed,
                                 const LossFunction& masked_loss) {
  if (trials == 0 || vocab_size == 0) throw Error(ErrorCode::InvalidArgument, "trials and vocab_size must be positive");
  TheoremReport report;
  report.name = "loss_dominance";
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gamma1(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr std::size_t kMaxStored = 16;

  for (std::size_t trial = 0; trial < trials; ++trial) {
    StepRecord rec;
    rec.dist.resize(vocab_size);
    double total = 0.0;
    for (auto& p : rec.dist) total += (p = gamma1(rng));
    for (auto& p : rec.dist) p /= total;
    rec.gold = std::uniform_int_distribution<std::size_t>(0, vocab_size - 1)(rng);

    // Every eighth trial keeps the full vocabulary; the rest keep each token
    // with a per-trial rate.
    const double keep = trial % 8 == 0 ? 1.0 : unit(rng);
    rec.mask = MaskVector(vocab_size, false);
    double removed = 0.0;
    for (std::size_t i = 0; i < vocab_size; ++i) {
      bool on = i == rec.gold || unit(rng) < keep;
      rec.mask.set(i, on);
      if (!on) removed += rec.dist[i];
    }

    const double lm = masked_loss(rec);
    const double lu = loss_unmasked(rec);
    ++report.checks;
    std::string reason;
    if (!(lm <= lu)) reason = "masked loss exceeds unmasked loss";
    if (removed > 1e-12) {
      ++report.strict_checks;
      if (reason.empty() && !(lm < lu)) reason = "masked-out mass is positive but loss did not drop";
    }
    if (!reason.empty() && report.violations.size() < kMaxStored) {
      report.violations.push_back({trial, rec.dist, rec.mask.unmasked_ids(), rec.gold, lm, lu, reason});
    } else if (!reason.empty()) {
      report.violations.push_back({trial, {}, {}, rec.gold, lm, lu, reason});
    }
  }
  return report;
}

std::vector<std::vector<double>> simplex_grid(std::size_t dims, std::size_t min_points) {
  if (dims == 0) return {};
  if (dims == 1) return {{1.0}};  // the simplex is a single point
  auto count = [dims](std::size_t k) {
    // C(k + dims - 1, dims - 1)
    double c = 1.0;
    for (std::size_t i = 1; i < dims; ++i) c = c * static_cast<double>(k + i) / static_cast<double>(i);
    return c;
  };
  std::size_t k = 1;
  while (count(k) < static_cast<double>(min_points)) ++k;

  std::vector<std::vector<double>> grid;
  std::vector<std::size_t> parts(dims, 0);
  // Enumerate compositions of k into `dims` non-negative parts.
  auto recurse = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
    if (index + 1 == dims) {
      parts[index] = remaining;
      std::vector<double> point(dims);
      for (std::size_t i = 0; i < dims; ++i) point[i] = static_cast<double>(parts[i]) / static_cast<double>(k);
      grid.push_back(std::move(point));
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      parts[index] = v;
      self(self, index + 1, remaining - v);
    }
  };
  recurse(recurse, 0, k);
  return grid;
}

TheoremReport theorem_precision_check(std::size_t min_size, std::size_t max_size, std::size_t min_grid,
                                      const PrecisionFunction& precision) {
  if (min_size == 0 || min_size > max_size || max_size > 8) {
    throw Error(ErrorCode::InvalidArgument, "exhaustive precision check needs 1 <= min_size <= max_size <= 8");
  }
  TheoremReport report;
  report.name = "precision_dominance";
  constexpr std::size_t kMaxStored = 16;
  std::size_t trial = 0;
  for (std::size_t n = min_size; n <= max_size; ++n) {
    const auto grid = simplex_grid(n, min_grid);
    for (const auto& dist : grid) {
      const std::size_t top = argmax(dist);
      for (std::size_t gold = 0; gold < n; ++gold) {
        for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
          if (!(bits & (1u << gold))) continue;
          StepRecord rec;
          rec.dist = dist;
          rec.gold = gold;
          rec.mask = MaskVector(n, false);
          for (std::size_t i = 0; i < n; ++i) rec.mask.set(i, (bits >> i) & 1u);
          const int pm = precision(rec, true);
          const int pu = precision(rec, false);
          ++report.checks;
          std::string reason;
          if (pm < pu) reason = "masked precision below unmasked precision";
          if (reason.empty() && rec.mask.allowed(top) && apply_mask(rec.dist, rec.mask).chosen != top) {
            reason = "restricting the support changed an argmax it contained";
          }
          if (!reason.empty()) {
            Counterexample c{trial, {}, {}, gold, static_cast<double>(pm), static_cast<double>(pu), reason};
            if (report.violations.size() < kMaxStored) {
              c.dist = rec.dist;
              c.unmasked = rec.mask.unmasked_ids();
            }
            report.violations.push_back(std::move(c));
          }
          ++trial;
        }
      }
    }
  }
  return report;
}

std::vector<StepRecord> step_records(const DecodeTrace& trace, std::span<const TokenId> gold) {
  if (trace.steps.empty() || trace.steps.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, "trace has " + std::to_string(trace.steps.size()) + " steps, gold has " +
                                               std::to_string(gold.size()) + " tokens");
  }
  std::vector<StepRecord> records;
  records.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& s = trace.steps[i];
    records.push_back(StepRecord{s.dist, gold[i], s.mask, s.chosen});
  }
  return records;
}

SequenceReport sequence_report(const DecodeTrace& trace, std::span<const TokenId> gold) {
  const auto records = step_records(trace, gold);
  SequenceReport report;
  double masked_sum = 0.0;
  double unmasked_sum = 0.0;
  report.exact_match = true;
  for (const auto& rec : records) {
    masked_sum += loss_masked(rec);
    unmasked_sum += loss_unmasked(rec);
    const int pm = precision_indicator(rec, true);
    report.precision_masked.push_back(pm);
    report.precision_unmasked.push_back(precision_indicator(rec, false));
    report.exact_match = report.exact_match && pm == 1;
  }
  report.mean_masked_loss = masked_sum / static_cast<double>(records.size());
  report.mean_unmasked_loss = unmasked_sum / static_cast<double>(records.size());
  return report;
}

}  // namespace callmask
