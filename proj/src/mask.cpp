#include "callmask/mask.hpp"

#include <cmath>
#include <string>

#include "callmask/error.hpp"

namespace callmask {

MaskVector MaskVector::from_ids(std::size_t size, std::span<const std::size_t> unmasked) {
  MaskVector mask(size, false);
  for (auto id : unmasked) mask.set(id, true);
  return mask;
}

std::size_t MaskVector::unmasked_count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

std::vector<std::size_t> MaskVector::unmasked_ids() const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) ids.push_back(i);
  }
  return ids;
}

std::vector<std::size_t> MaskVector::masked_ids() const {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (!bits_[i]) ids.push_back(i);
  }
  return ids;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

MaskedDistribution apply_mask(std::span<const double> dist, const MaskVector& mask) {
  if (dist.size() != mask.size()) {
    throw Error(ErrorCode::LengthMismatch, "distribution has " + std::to_string(dist.size()) +
                                               " entries, mask has " + std::to_string(mask.size()));
  }
  MaskedDistribution out;
  out.raw.resize(dist.size());
  double mass = 0.0;
  std::size_t allowed = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (mask.allowed(i)) {
      out.raw[i] = dist[i];
      mass += dist[i];
      ++allowed;
    }
  }
  if (allowed == 0) throw Error(ErrorCode::ConstraintDeadlock, "every token is masked");

  out.renormalized.resize(dist.size(), 0.0);
  if (mass > 0.0) {
    for (std::size_t i = 0; i < dist.size(); ++i) out.renormalized[i] = out.raw[i] / mass;
    out.chosen = argmax(out.raw);
  } else {
    out.zero_mass_fallback = true;
    const double uniform = 1.0 / static_cast<double>(allowed);
    bool first = true;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (!mask.allowed(i)) continue;
      out.renormalized[i] = uniform;
      if (first) {
        out.chosen = i;
        first = false;
      }
    }
  }
  return out;
}

void check_distribution(std::span<const double> dist, double tolerance) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidDistribution, "distribution has a negative or non-finite entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw Error(ErrorCode::InvalidDistribution, "distribution sums to " + std::to_string(sum));
  }
}

}  // namespace callmask
