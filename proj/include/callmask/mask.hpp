#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace callmask {

/// {0,1} vector over the vocabulary. Unmasked ids form V1, masked ids V2.
class MaskVector {
 public:
  MaskVector() = default;
  explicit MaskVector(std::size_t size, bool value = true) : bits_(size, value ? 1 : 0) {}
  explicit MaskVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  static MaskVector from_ids(std::size_t size, std::span<const std::size_t> unmasked);

  std::size_t size() const { return bits_.size(); }
  bool allowed(std::size_t id) const { return bits_[id] != 0; }
  void set(std::size_t id, bool value) { bits_[id] = value ? 1 : 0; }

  std::size_t unmasked_count() const;
  std::vector<std::size_t> unmasked_ids() const;
  std::vector<std::size_t> masked_ids() const;
  bool all_allowed() const { return unmasked_count() == bits_.size(); }

  friend bool operator==(const MaskVector&, const MaskVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Lowest index among the maxima; size() must be > 0.
std::size_t argmax(std::span<const double> values);

struct MaskedDistribution {
  std::vector<double> raw;           // dist ⊙ mask, exactly as in the masked argmax
  std::vector<double> renormalized;  // raw / Σ raw, or uniform over V1 on fallback
  bool zero_mass_fallback = false;   // every unmasked entry had probability 0
  std::size_t chosen = 0;            // argmax of `raw` (ties: lowest id)
};

/// Applies the mask and renormalizes over V1. When V1 carries no mass the
/// result is uniform over V1 and zero_mass_fallback is set. Throws
/// Error(LengthMismatch) on size disagreement and Error(ConstraintDeadlock)
/// when V1 is empty.
MaskedDistribution apply_mask(std::span<const double> dist, const MaskVector& mask);

/// Throws Error(InvalidDistribution) unless entries are non-negative and sum
/// to 1 within `tolerance`.
void check_distribution(std::span<const double> dist, double tolerance = 1e-9);

}  // namespace callmask
