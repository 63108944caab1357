#include <cmath>
#include <numeric>

#include "callmask/mask.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace callmask;

TEST_CASE("apply_mask renormalizes over V1") {
  auto r = apply_mask(std::vector<double>{0.25, 0.25, 0.25, 0.25}, MaskVector(std::vector<std::uint8_t>{1, 1, 0, 0}));
  CHECK(r.renormalized == std::vector<double>{0.5, 0.5, 0.0, 0.0});
  CHECK(r.chosen == 0);

  auto s = apply_mask(std::vector<double>{0.5, 0.3, 0.2}, MaskVector(std::vector<std::uint8_t>{1, 1, 0}));
  CHECK(s.renormalized[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(s.renormalized[1] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(s.renormalized[2] == 0.0);
  CHECK(s.raw == std::vector<double>{0.5, 0.3, 0.0});

  std::vector<double> d{0.1, 0.6, 0.3};
  auto full = apply_mask(d, MaskVector(3, true));
  CHECK(full.renormalized == d);
  CHECK(full.chosen == 1);
}

TEST_CASE("zero mass falls back to uniform over V1") {
  auto r = apply_mask(std::vector<double>{1.0, 0.0, 0.0, 0.0}, MaskVector(std::vector<std::uint8_t>{0, 0, 1, 1}));
  CHECK(r.zero_mass_fallback);
  CHECK(r.renormalized == std::vector<double>{0.0, 0.0, 0.5, 0.5});
  CHECK(r.chosen == 2);
}

TEST_CASE("apply_mask errors") {
  CHECK(error_of([] { apply_mask(std::vector<double>{1.0}, MaskVector(2, true)); }) == ErrorCode::LengthMismatch);
  CHECK(error_of([] { apply_mask(std::vector<double>{0.5, 0.5}, MaskVector(2, false)); }) ==
        ErrorCode::ConstraintDeadlock);
  CHECK(error_of([] { check_distribution(std::vector<double>{0.5, 0.6}); }) == ErrorCode::InvalidDistribution);
  CHECK(error_of([] { check_distribution(std::vector<double>{1.5, -0.5}); }) == ErrorCode::InvalidDistribution);
  check_distribution(std::vector<double>{0.5, 0.5});
}

TEST_CASE("argmax ties go to the lowest id") {
  CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
  CHECK(argmax(std::vector<double>{0.0}) == 0);
}

TEST_CASE("MaskVector partitions the vocabulary") {
  std::vector<std::size_t> on{1, 3};
  auto m = MaskVector::from_ids(5, on);
  CHECK(m.unmasked_ids() == on);
  CHECK(m.masked_ids() == std::vector<std::size_t>{0, 2, 4});
  CHECK(m.unmasked_count() == 2);
  CHECK_FALSE(m.all_allowed());
}

TEST_CASE("property: masked argmax equals argmax of the product; output is a distribution") {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> ex(1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> d(n);
    for (auto& x : d) x = rng() % 7 == 0 ? 0.0 : ex(rng);
    double total = std::accumulate(d.begin(), d.end(), 0.0);
    if (total == 0.0) d[0] = total = 1.0;
    for (auto& x : d) x /= total;
    MaskVector m(n, false);
    for (std::size_t i = 0; i < n; ++i) m.set(i, rng() % 2);
    m.set(rng() % n, true);

    auto r = apply_mask(d, m);
    std::vector<double> product(n);
    for (std::size_t i = 0; i < n; ++i) product[i] = m.allowed(i) ? d[i] : 0.0;
    double mass = std::accumulate(product.begin(), product.end(), 0.0);
    if (mass > 0.0) {
      CHECK(r.chosen == argmax(product));
      CHECK(argmax(r.renormalized) == r.chosen);
      CHECK_FALSE(r.zero_mass_fallback);
    } else {
      CHECK(r.zero_mass_fallback);
      CHECK(r.chosen == m.unmasked_ids().front());
    }
    CHECK(std::accumulate(r.renormalized.begin(), r.renormalized.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < n; ++i) {
      if (!m.allowed(i)) CHECK(r.renormalized[i] == 0.0);
    }
  }
}
