#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helfrich/errors.hpp"
#include "helfrich/solution_analysis.hpp"
#include "oracles.hpp"

using namespace helfrich;

namespace {

const HelfrichParams kReference{1.0, 0.25, 1.0};

const Trajectory& reference() {
  static const Trajectory traj = integrate(kReference, 0.05);
  return traj;
}

double relErr(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("sphere totals") {
  const double pi = std::numbers::pi;
  for (double R : {1.0, 2.5}) {
    const SurfaceTotals t = oracle::sphereTotals(R, SolverConfig{});
    CHECK(relErr(t.area, 4 * pi * R * R) <= 1e-6);
    CHECK(relErr(t.volume, 4 * pi * R * R * R / 3) <= 1e-6);
    // (2H)^2 = 4/R^2 over the whole sphere
    CHECK(relErr(t.bendingEnergy, 16 * pi) <= 1e-6);
  }
}

TEST_CASE("totals agree with independent re-quadrature") {
  for (double w0p : {0.2, 0.05, 0.01}) {
    const Trajectory traj = integrate(kReference, w0p);
    const SurfaceTotals t = surfaceTotals(traj);
    const oracle::Totals q = oracle::requadrature(traj);
    CHECK(relErr(t.area, q.area) <= 1e-7);
    CHECK(relErr(t.volume, q.volume) <= 1e-7);
    CHECK(relErr(t.bendingEnergy, q.energy) <= 1e-7);
    CHECK(t.helfrichEnergy == doctest::Approx(t.bendingEnergy + kReference.p * t.volume).epsilon(1e-14));
    CHECK(t.area > 0);
    CHECK(t.volume > 0);
  }
}

TEST_CASE("landmarks of the reference run") {
  const Trajectory& traj = reference();
  const Landmarks lm = extractLandmarks(traj);
  const double rM = require(lm.rM, "rM"), r0 = require(lm.r0, "r0"), rInf = require(lm.rInf, "rInf");
  CHECK(0 < rM);
  CHECK(rM < r0);
  CHECK(r0 < rInf);
  CHECK(*lm.wMax > 0);
  CHECK(*lm.wpAtR0 < 0);
  CHECK(*lm.zInf < 0);
  CHECK(lm.nCriticalPoints == 1);
  CHECK(lm.extremaBeyondZero == 0);
  CHECK(traj.stateA(traj.rEnd())(slot::Z) == doctest::Approx(traj.zBegin()).epsilon(1e-14));
}

TEST_CASE("missing landmarks") {
  const Trajectory traj = integrate(HelfrichParams{5.0, 0.0, 0.1}, 1.0);
  const Landmarks lm = extractLandmarks(traj);
  CHECK_FALSE(lm.r0);
  CHECK_FALSE(lm.rInf);
  CHECK_THROWS_AS(require(lm.r0, "r0"), Error);
  const Classification c = classify(traj, lm);
  CHECK(c.verdict == Verdict::BlowUpPositive);
  CHECK_FALSE(c.c2);
  CHECK_THROWS_AS(profile(traj, 64), Error);
  CHECK_THROWS_AS(surfaceTotals(traj), Error);
}

TEST_CASE("classification") {
  const Trajectory& traj = reference();
  const Landmarks lm = extractLandmarks(traj);
  const Classification c = classify(traj, lm);
  CHECK(c.verdict == Verdict::Biconcave);
  CHECK(c.c1);
  CHECK(c.c2);
  CHECK(c.c3);

  Landmarks raised = lm;
  raised.zInf = 0.1;
  CHECK(classify(traj, raised).verdict == Verdict::NonNegativeDisplacement);
  Landmarks wavy = lm;
  wavy.nCriticalPoints = 3;
  CHECK(classify(traj, wavy).verdict == Verdict::Multimodal);
}

TEST_CASE("geometry limits") {
  const Trajectory& traj = reference();
  const GeometrySample axis = geometryAt(traj, 0.0);
  CHECK(axis.kappaMeridional == doctest::Approx(0.05));
  CHECK(axis.kappaLongitudinal == doctest::Approx(0.05));
  const GeometrySample near = geometryAt(traj, traj.rBegin());
  CHECK(near.kappaMeridional == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(near.kappaLongitudinal == doctest::Approx(0.05).epsilon(1e-6));

  const Landmarks lm = extractLandmarks(traj);
  const GeometrySample zero = geometryAt(traj, *lm.r0);
  CHECK(std::abs(zero.kappaMeridional) <= 1e-9);
  CHECK(zero.K <= 1e-12);

  const GeometrySample eq = geometryAtZ(traj, traj.zEnd());
  CHECK(eq.kappaMeridional == doctest::Approx(-1.0 / *lm.rInf).epsilon(1e-9));
  CHECK(std::isinf(eq.w));
  CHECK_THROWS_AS(geometryAt(traj, traj.rEnd() * 2), Error);
}

TEST_CASE("mean and Gaussian curvature consistency") {
  const Trajectory& traj = reference();
  const double r0 = *extractLandmarks(traj).r0;
  for (int i = 1; i < 200; ++i) {
    const double r = traj.rBegin() + (traj.rEnd() - traj.rBegin()) * i / 200.0;
    const StateVector y = traj.stateA(r);
    const double w = y(slot::W), wp = y(slot::Wp), s = 1 + w * w;
    const GeometrySample g = geometryAt(traj, r);
    const double H = (wp + (w / r) * s) / (2 * s * std::sqrt(s));
    CHECK(g.H == doctest::Approx(H).epsilon(1e-12));
    CHECK(g.H == doctest::Approx(0.5 * (g.kappaMeridional + g.kappaLongitudinal)).epsilon(1e-14));
    // on (0, r0) the Gaussian curvature has the sign of w'
    if (r < r0 && std::abs(wp) > 1e-6) CHECK((g.K > 0) == (wp > 0));
  }
}

TEST_CASE("variation residual") {
  const Trajectory& traj = reference();
  CHECK(elResidual(traj) <= 1e-6);

  // sensitivity to a perturbation of w''
  const double r = 0.5 * (traj.rBegin() + traj.rEnd());
  const StateVector y = traj.stateA(r);
  const double w = y(slot::W), wp = y(slot::Wp);
  const double wpp = shapeSecondDerivative(r, w, wp, kReference);
  const VariationResidual base = shapeResidual(r, w, wp, wpp, kReference);
  const VariationResidual bumped = shapeResidual(r, w, wp, wpp + 1e-3, kReference);
  CHECK(std::abs(base.value) <= 1e-12 * base.scale);
  const double s = 1 + w * w;
  CHECK(std::abs(bumped.value - base.value) == doctest::Approx(1e-3 * 2 * r / std::pow(s, 2.5)).epsilon(1e-6));

  SolverConfig loose;
  loose.relTol = 1e-6;
  loose.absTol = 1e-8;
  CHECK(elResidual(integrate(kReference, 0.05, loose)) > elResidual(traj));
}

TEST_CASE("equator identity") {
  double last = 1.0;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    SolverConfig cfg;
    cfg.relTol = tol;
    cfg.absTol = tol * 1e-2;
    const double res = equatorIdentityResidual(integrate(kReference, 0.05, cfg));
    CHECK(res < last);
    last = res;
  }
  CHECK(last <= 1e-4);
}

TEST_CASE("eta stays bounded") {
  const EtaReport rep = etaBoundedness(reference());
  CHECK_FALSE(rep.diverging);
  CHECK(std::isfinite(rep.supEta));
  CHECK(std::abs(rep.etaTimesSlopeExtrapolated) <= 1e-4);

  SolverConfig tight;
  tight.relTol = 1e-12;
  tight.absTol = 1e-14;
  const EtaReport fine = etaBoundedness(integrate(kReference, 0.05, tight));
  CHECK(fine.supEta == doctest::Approx(rep.supEta).epsilon(0.1));
}

TEST_CASE("profile symmetry") {
  const std::vector<Eigen::Vector2d> curve = profile(reference(), 128);
  REQUIRE(curve.size() == 4 * 128 - 3);
  CHECK(curve.front() == curve.back());
  const std::size_t quarter = 127;
  for (std::size_t i = 0; i <= quarter; ++i) {
    const Eigen::Vector2d& a = curve[i];
    CHECK(curve[2 * quarter - i] == Eigen::Vector2d(a.x(), -a.y()));
    CHECK(curve[2 * quarter + i] == Eigen::Vector2d(-a.x(), -a.y()));
  }
  const std::vector<ProfilePoint> half = halfProfile(reference(), 128);
  const Landmarks lm = extractLandmarks(reference());
  CHECK(half.front().r == 0.0);
  CHECK(half.front().height == doctest::Approx(-*lm.zInf));
  CHECK(half.back().height == 0.0);
  CHECK(half.back().r == doctest::Approx(*lm.rInf).epsilon(1e-12));
  double top = 0.0;
  for (const auto& pt : half) top = std::max(top, pt.height);
  // dimple: the axis sits below the rim
  CHECK(half.front().height < top);
}

TEST_CASE("critical point count is stable under tolerance refinement") {
  SolverConfig loose;
  loose.relTol = 1e-8;
  SolverConfig tight;
  tight.relTol = 1e-10;
  for (double w0p : geometricGrid(0.2, 1e-3, 20)) {
    const int a = extractLandmarks(integrate(kReference, w0p, loose)).nCriticalPoints;
    const int b = extractLandmarks(integrate(kReference, w0p, tight)).nCriticalPoints;
    CHECK(a == b);
  }
}
