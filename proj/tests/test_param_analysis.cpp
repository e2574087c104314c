#include <doctest.h>

#include <cmath>
#include <limits>

#include "helfrich/errors.hpp"
#include "helfrich/param_analysis.hpp"
#include "oracles.hpp"

using namespace helfrich;

namespace {

const HelfrichParams kReference{1.0, 0.25, 1.0};

// Root of Q in [lo, hi] by 50-digit bisection.
double bisectRoot(const HelfrichParams& params, double lo, double hi) {
  oracle::Big a(lo), b(hi);
  const bool rising = evalQ(b, params) > 0;
  for (int i = 0; i < 200; ++i) {
    const oracle::Big m = (a + b) / 2;
    ((evalQ(m, params) > 0) == rising ? b : a) = m;
  }
  return ((a + b) / 2).convert_to<double>();
}

}  // namespace

TEST_CASE("evalQ examples") {
  CHECK(evalQ(0.0, kReference) == -0.5);
  CHECK(evalQ(1.0, HelfrichParams{0.0, 0.0, 2.0}) == 0.0);
  CHECK(evalQ(0.1, kReference) == doctest::Approx(-0.354).epsilon(1e-14));
  CHECK(evalR(1.0, HelfrichParams{5.0, 0.0, 0.1}) == doctest::Approx(34.95).epsilon(1e-14));
}

TEST_CASE("Q = R + t^3 over random inputs") {
  oracle::Rng rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const HelfrichParams params{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double t = rng.uniform(-10, 10);
    const double gap = std::abs(evalQ(t, params) - evalR(t, params) - t * t * t);
    worst = std::max(worst, gap / (1.0 + std::abs(t * t * t)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("roots of simple cubics") {
  SUBCASE("t^3 - 1") {
    const CubicAnalysis a = analyzeCubic(HelfrichParams{0.0, 0.0, 2.0});
    REQUIRE(a.realRoots.size() == 1);
    CHECK(a.realRoots[0].value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.allRootsPositive);
    CHECK(a.smallestPositiveRoot() == doctest::Approx(1.0));
  }
  SUBCASE("three real roots of mixed sign") {
    const CubicAnalysis a = analyzeCubic(HelfrichParams{0.0, -2.0, 2.0});
    REQUIRE(a.realRoots.size() == 3);
    CHECK(a.realRoots[0].value == doctest::Approx(-1.0).epsilon(1e-13));
    CHECK(a.realRoots[1].value == doctest::Approx((1 - std::sqrt(5.0)) / 2).epsilon(1e-13));
    CHECK(a.realRoots[2].value == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-13));
    CHECK_FALSE(a.allRootsPositive);
  }
  SUBCASE("reference parameters") {
    const CubicAnalysis a = analyzeCubic(kReference);
    REQUIRE(a.realRoots.size() == 1);
    CHECK(a.allRootsPositive);
    CHECK(a.realRoots[0].value == doctest::Approx(bisectRoot(kReference, 0.0, 1.0)).epsilon(1e-13));
    CHECK(a.realRoots[0].value == doctest::Approx(0.2689).epsilon(1e-3));
  }
  SUBCASE("double root") {
    // (t - 1)^2 (t + 2)
    const CubicAnalysis a = analyzeCubic(HelfrichParams{0.0, -3.0, -4.0});
    REQUIRE(a.realRoots.size() == 2);
    CHECK(a.realRoots[0].value == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(a.realRoots[1].value == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(a.realRoots[1].multiplicity == 2);
  }
  SUBCASE("triple root") {
    // (t - 1)^3
    const CubicAnalysis a = analyzeCubic(HelfrichParams{-1.5, 0.75, 2.0});
    REQUIRE(a.realRoots.size() == 1);
    CHECK(a.realRoots[0].value == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(a.realRoots[0].multiplicity == 3);
    CHECK(a.allRootsPositive);
  }
  SUBCASE("zero root is not positive") {
    const CubicAnalysis a = analyzeCubic(HelfrichParams{1.0, 0.0, 0.0});
    CHECK_FALSE(a.allRootsPositive);
  }
}

TEST_CASE("root residuals and positivity flag on random cubics") {
  oracle::Rng rng(11);
  for (int i = 0; i < 20000; ++i) {
    const HelfrichParams params{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const CubicAnalysis a = analyzeCubic(params);
    REQUIRE_FALSE(a.realRoots.empty());
    bool positive = true;
    for (const RealRoot& root : a.realRoots) {
      const double t = root.value;
      const double scale =
          std::abs(t * t * t) + std::abs(params.a2() * t * t) + std::abs(params.a1() * t) + std::abs(params.a0());
      if (root.multiplicity == 1) CHECK(std::abs(evalQ(t, params)) <= 1e-12 * std::max(1.0, scale));
      positive = positive && t > 0;
    }
    CHECK(a.allRootsPositive == positive);
    for (std::size_t k = 1; k < a.realRoots.size(); ++k) CHECK(a.realRoots[k - 1].value < a.realRoots[k].value);
  }
}

TEST_CASE("derived constants example") {
  const DerivedConstants c = derivedConstants(kReference, 0.1);
  CHECK(c.deltaPlus == doctest::Approx(0.354).epsilon(1e-12));
  CHECK(c.mu == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.deltaMinus == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(c.xi == doctest::Approx(1.0 - 64e-3 / (27 * 0.354)).epsilon(1e-12));
  CHECK(c.delta == std::min(c.deltaPlus / 8, c.deltaMinus / 2));
  CHECK_THROWS_AS(derivedConstants(kReference, -0.1), Error);
  try {
    derivedConstants(kReference, -0.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSlope);
  }
}

TEST_CASE("small slope limit") {
  const DerivedConstants c = derivedConstants(kReference, 1e-9);
  CHECK(c.deltaPlus == doctest::Approx(kReference.p / 2).epsilon(1e-8));
  CHECK(c.mu == doctest::Approx(kReference.p / 2).epsilon(1e-8));
}

TEST_CASE("derived constants against dense sampling") {
  oracle::Rng rng(3);
  for (int i = 0; i < 25; ++i) {
    const HelfrichParams params{rng.uniform(-2, 2), rng.uniform(-1, 3), rng.uniform(0.1, 3)};
    const double w0p = rng.uniform(0.01, 1.0);
    const DerivedConstants c = derivedConstants(params, w0p);
    const oracle::SampledConstants s = oracle::sampleConstants(params, w0p);
    CHECK(std::abs(c.mu - s.mu) <= 1e-6);
    CHECK(std::abs(c.deltaPlus - s.deltaPlus) <= 1e-6);
    if (std::isfinite(c.deltaMinus)) CHECK(std::abs(c.deltaMinus - s.deltaMinus) <= 1e-6);
    // the exact extrema are never beaten by the samples
    CHECK(c.mu >= s.mu - 1e-12);
    CHECK(c.deltaPlus <= s.deltaPlus + 1e-12);
    CHECK(c.deltaMinus <= s.deltaMinus + 1e-12);
  }
}

TEST_CASE("invariants of the derived constants") {
  oracle::Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const HelfrichParams params{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double w0p = rng.uniform(1e-4, 2.0);
    const DerivedConstants c = derivedConstants(params, w0p);
    CHECK(c.mu >= c.deltaPlus);
    CHECK(c.delta <= c.deltaPlus / 8);
    CHECK(c.delta <= c.deltaMinus / 2);
    CHECK(c.xi < 1.0);
    const CubicAnalysis a = analyzeCubic(params);
    if (a.allRootsPositive && w0p < a.smallestPositiveRoot()) {
      CHECK(c.deltaPlus > 0);
      CHECK(c.deltaMinus > 0);
    }
  }
}
