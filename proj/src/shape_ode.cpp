#include "helfrich/shape_ode.hpp"

#include <algorithm>
#include <sstream>

namespace helfrich {

StateVector ChartAState::vector() const {
  StateVector y;
  y << w, wp, z, arclength, areaAcc, volAcc, energyAcc;
  return y;
}

ChartAState ChartAState::fromVector(double r, const StateVector& y) {
  return {r, y(slot::W), y(slot::Wp), y(slot::Z), y(slot::Arc), y(slot::Area), y(slot::Volume), y(slot::Energy)};
}

StateVector ChartBState::vector() const {
  StateVector y;
  y << u, up, upp, arclength, areaAcc, volAcc, energyAcc;
  return y;
}

ChartBState ChartBState::fromVector(double z, const StateVector& y) {
  return {z, y(slot::U), y(slot::Up), y(slot::Upp), y(slot::Arc), y(slot::Area), y(slot::Volume), y(slot::Energy)};
}

double rhsKappa(double r, double kappa, double kappap, const HelfrichParams& params) {
  if (!(r > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "kappa equation needs r > 0");
  const double denom = 1.0 - r * r * kappa * kappa;
  if (std::abs(denom) < 1e-12) throw Error(ErrorCode::SingularDenominator, "1 - r^2 kappa^2 vanishes");
  const double slope = r * kappap + kappa;
  const double rk2 = -r * kappa * slope * slope / (2.0 * denom) - 3.0 * kappap +
                     r * evalQ(kappa, params) / (2.0 * denom);
  return rk2 / r;
}

Curvatures curvaturesChartA(double r, double w, double wp) {
  const double s = 1.0 + w * w;
  const double rs = std::sqrt(s);
  return {w / (r * rs), wp / (s * rs)};
}

Curvatures curvaturesChartB(double u, double up, double upp) {
  const double s = 1.0 + up * up;
  const double rs = std::sqrt(s);
  return {-1.0 / (u * rs), upp / (s * rs)};
}

namespace {

double energyDensity(const Curvatures& k, const HelfrichParams& params) {
  const double h2 = 2.0 * k.mean() + params.c0;
  return h2 * h2 + params.lambda;
}

// Quadrature rates in chart A given w and w'.
void chartAQuadratures(double r, double w, double wp, const HelfrichParams& params, StateVector& dy) {
  const double rs = std::sqrt(1.0 + w * w);
  dy(slot::Z) = w;
  dy(slot::Arc) = rs;
  dy(slot::Area) = r * rs;
  dy(slot::Volume) = r * r * w;
  dy(slot::Energy) = energyDensity(curvaturesChartA(r, w, wp), params) * r * rs;
}

// Quadrature rates in chart B; dz < 0 while the profile descends.
void chartBQuadratures(double u, double q, double upp, const HelfrichParams& params, StateVector& dy) {
  const double rs = std::sqrt(1.0 + q * q);
  dy(slot::Arc) = -rs;
  dy(slot::Area) = -u * rs;
  dy(slot::Volume) = u * u;
  dy(slot::Energy) = -energyDensity(curvaturesChartB(u, q, upp), params) * u * rs;
}

}  // namespace

StateVector rhsChartA(double r, const StateVector& y, const HelfrichParams& params) {
  if (!(r > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "chart A needs r > 0");
  const double w = y(slot::W), wp = y(slot::Wp);
  StateVector dy;
  dy(slot::W) = wp;
  dy(slot::Wp) = shapeSecondDerivative(r, w, wp, params);
  chartAQuadratures(r, w, wp, params, dy);
  return dy;
}

StateVector rhsChartB(double /*z*/, const StateVector& y, const HelfrichParams& params) {
  const double u = y(slot::U), q = y(slot::Up), upp = y(slot::Upp);
  if (!(u > 0.0)) throw Error(ErrorCode::NonPositiveRadius, "chart B needs u > 0");
  StateVector dy;
  dy(slot::U) = q;
  dy(slot::Up) = upp;
  // q == 0 exactly only if a stage lands on the equator; the limit is taken
  // from the neighbouring side.
  const double qSafe = q != 0.0 ? q : -std::numeric_limits<double>::min();
  dy(slot::Upp) = chartBThirdDerivative(u, qSafe, upp, params);
  chartBQuadratures(u, q, upp, params, dy);
  return dy;
}

StateVector SphereProfile::chartA(double r, const StateVector& y) const {
  const double w = y(slot::W), wp = y(slot::Wp);
  StateVector dy;
  dy(slot::W) = wp;
  dy(slot::Wp) = -3.0 * w * wp * std::sqrt(1.0 + w * w) / radius_;
  chartAQuadratures(r, w, wp, params_, dy);
  return dy;
}

StateVector SphereProfile::chartB(double /*z*/, const StateVector& y) const {
  const double u = y(slot::U), q = y(slot::Up), upp = y(slot::Upp);
  StateVector dy;
  dy(slot::U) = q;
  dy(slot::Up) = upp;
  dy(slot::Upp) = -3.0 * q * std::sqrt(1.0 + q * q) * upp / radius_;
  chartBQuadratures(u, q, upp, params_, dy);
  return dy;
}

ChartAState SphereProfile::startState(double eps) const {
  const double R = radius_;
  const double root = std::sqrt(R * R - eps * eps);
  ChartAState s;
  s.r = eps;
  s.w = -eps / root;
  s.wp = -R * R / (root * root * root);
  s.z = root - R;
  s.arclength = R * std::asin(eps / R);
  s.areaAcc = R * (R - root);
  // int_0^eps r^3 / sqrt(R^2 - r^2) dr
  s.volAcc = -((2.0 * R * R * R) / 3.0 - root * (2.0 * R * R + eps * eps) / 3.0);
  const Curvatures k{-1.0 / R, -1.0 / R};
  const double h2 = 2.0 * k.mean() + params_.c0;
  s.energyAcc = (h2 * h2 + params_.lambda) * s.areaAcc;
  return s;
}

double SolverConfig::resolvedEpsStart(const HelfrichParams& params, double w0p) const {
  if (epsStart) return *epsStart;
  const double p = params.p > 0.0 ? params.p : 1.0;
  return std::min(1e-5, 1e-3 * std::sqrt(32.0 * w0p / (3.0 * p)));
}

double SolverConfig::resolvedRMax(const HelfrichParams& params, double w0p) const {
  if (rMax) return *rMax;
  const double p = params.p > 0.0 ? params.p : 1.0;
  return 1e3 * std::sqrt(w0p / p + 1.0);
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (!(relTol > 0.0 && relTol < 1.0)) fail("relTol must lie in (0, 1)");
  if (!(absTol > 0.0)) fail("absTol must be positive");
  if (epsStart && !(*epsStart > 0.0)) fail("epsStart must be positive");
  if (!(wSwitch > 1.0)) fail("wSwitch must exceed 1");
  if (rMax && !(*rMax > 0.0)) fail("rMax must be positive");
  if (maxSteps <= 0) fail("maxSteps must be positive");
  if (!(eventTol > 0.0)) fail("eventTol must be positive");
}

double seriesCoefficient(const HelfrichParams& params, double w0p) {
  return (evalQ(w0p, params) + 7.0 * w0p * w0p * w0p) / 16.0;
}

ChartAState seriesStart(const HelfrichParams& params, double w0p, double eps) {
  if (!(w0p > 0.0) || !std::isfinite(w0p)) throw Error(ErrorCode::InvalidSlope, "initial slope must be positive");
  const double p = params.p > 0.0 ? params.p : 1.0;
  if (!(eps > 0.0) || !(eps < 0.1 * std::sqrt(w0p / p + 1.0)))
    throw Error(ErrorCode::EpsTooLarge, "series start radius outside (0, 0.1 sqrt(w0p/p + 1))");
  const double a = w0p;
  const double a3 = seriesCoefficient(params, w0p);
  if (std::abs(a3) * eps * eps * eps > 0.01 * a * eps)
    throw Error(ErrorCode::EpsTooLarge, "cubic series correction exceeds 1% of the linear term");

  const double e2 = eps * eps, e3 = e2 * eps, e4 = e2 * e2;
  ChartAState s;
  s.r = eps;
  s.w = a * eps + a3 * e3;
  s.wp = a + 3.0 * a3 * e2;
  s.z = 0.5 * a * e2 + 0.25 * a3 * e4;
  s.arclength = eps + a * a * e3 / 6.0;
  s.areaAcc = 0.5 * e2 + a * a * e4 / 8.0;
  s.volAcc = 0.25 * a * e4 + a3 * e4 * e2 / 6.0;
  const double h2 = 2.0 * a + params.c0;
  s.energyAcc = (h2 * h2 + params.lambda) * 0.5 * e2;
  return s;
}

ChartBState chartSwitch(const ChartAState& a) {
  if (!(a.w < 0.0)) throw Error(ErrorCode::BadSwitch, "chart switch needs w < 0");
  ChartBState b;
  b.z = a.z;
  b.u = a.r;
  b.up = 1.0 / a.w;
  b.upp = -a.wp * b.up * b.up * b.up;
  b.arclength = a.arclength;
  b.areaAcc = a.areaAcc;
  b.volAcc = a.volAcc;
  b.energyAcc = a.energyAcc;
  return b;
}

std::string_view toString(EventKind kind) {
  switch (kind) {
    case EventKind::MaxOfW: return "MaxOfW";
    case EventKind::ZeroOfW: return "ZeroOfW";
    case EventKind::ChartSwitch: return "ChartSwitch";
    case EventKind::Equator: return "Equator";
    case EventKind::BlowUpPositive: return "BlowUpPositive";
    case EventKind::Aborted: return "Aborted";
  }
  return "Unknown";
}

std::string_view toString(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Equator: return "Equator";
    case TrajectoryStatus::BlowUpPositive: return "BlowUpPositive";
    case TrajectoryStatus::Aborted: return "Aborted";
  }
  return "Unknown";
}

}  // namespace helfrich
