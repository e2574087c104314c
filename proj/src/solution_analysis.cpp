#include "helfrich/solution_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace helfrich {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const Event& requireEvent(const Trajectory& traj, EventKind kind) {
  const Event* e = traj.find(kind);
  if (!e) throw Error(ErrorCode::MissingEvent, "trajectory has no " + std::string(toString(kind)) + " event");
  return *e;
}

// Strict sign changes of g over `count` uniform samples of [a, b].
template <typename F>
int countSignChanges(double a, double b, int count, F&& g) {
  int changes = 0;
  int lastSign = 0;
  for (int i = 0; i <= count; ++i) {
    const double t = i == count ? b : a + (b - a) * (double(i) / count);
    const double v = g(t);
    const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (lastSign != 0 && sign != lastSign) ++changes;
    lastSign = sign;
  }
  return changes;
}

// Least-squares intercept of y = a + b x.
double interceptFit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (det == 0.0) return y.empty() ? kNaN : y.back();
  return (sxx * sy - sx * sxy) / det;
}

GeometrySample axisSample(const Trajectory& traj) {
  GeometrySample g;
  g.kappaMeridional = g.kappaLongitudinal = traj.axisCurvature;
  g.H = traj.axisCurvature;
  g.K = traj.axisCurvature * traj.axisCurvature;
  return g;
}

}  // namespace

double require(const std::optional<double>& value, const char* name) {
  if (!value) throw Error(ErrorCode::MissingEvent, std::string("landmark ") + name + " is absent");
  return *value;
}

Landmarks extractLandmarks(const Trajectory& traj) {
  Landmarks lm;
  if (const Event* e = traj.find(EventKind::MaxOfW)) {
    lm.rM = e->location;
    lm.wMax = e->state(slot::W);
  }
  if (const Event* e = traj.find(EventKind::ZeroOfW)) {
    lm.r0 = e->location;
    lm.wpAtR0 = e->state(slot::Wp);
  }
  if (const Event* e = traj.find(EventKind::Equator)) {
    lm.rInf = e->state(slot::U);
    lm.zInf = e->location;
  }
  if (traj.chartA.empty()) return lm;

  auto wp = [&](double r) { return traj.stateA(r)(slot::Wp); };
  const double rLo = traj.rBegin();
  const double rZero = lm.r0.value_or(traj.rEnd());
  const int samples = std::max(10000, int(traj.chartA.size()) * 8);
  lm.nCriticalPoints = countSignChanges(rLo, rZero, samples, wp);
  if (lm.r0 && *lm.r0 < traj.rEnd()) lm.extremaBeyondZero = countSignChanges(*lm.r0, traj.rEnd(), samples, wp);
  if (lm.r0 && traj.hasChartB()) {
    // With u' < 0 the sign of w' equals the sign of u''.
    lm.extremaBeyondZero += countSignChanges(traj.zBegin(), traj.zEnd(), std::max(2000, int(traj.chartB.size()) * 8),
                                             [&](double z) { return traj.stateB(z)(slot::Upp); });
  }
  return lm;
}

std::string_view toString(Verdict verdict) {
  switch (verdict) {
    case Verdict::Biconcave: return "Biconcave";
    case Verdict::BlowUpPositive: return "BlowUpPositive";
    case Verdict::Multimodal: return "Multimodal";
    case Verdict::NonNegativeDisplacement: return "NonNegativeDisplacement";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "Unknown";
}

Classification classify(const Trajectory& traj, const Landmarks& lm) {
  Classification c;
  switch (traj.status) {
    case TrajectoryStatus::Aborted:
      c.verdict = Verdict::Indeterminate;
      c.evidence = "integration aborted: " + traj.detail;
      return c;
    case TrajectoryStatus::BlowUpPositive:
      c.verdict = Verdict::BlowUpPositive;
      c.evidence = "C2 fails: w blows up to +infinity";
      return c;
    case TrajectoryStatus::Equator:
      break;
  }

  c.c2 = true;
  if (!lm.rM || !lm.r0) {
    c.verdict = Verdict::Indeterminate;
    c.evidence = "equator reached without a positive maximum and zero of w";
    return c;
  }
  c.c1 = lm.nCriticalPoints == 1 && lm.extremaBeyondZero == 0;
  const double cap = traj.config.resolvedRMax(traj.params, traj.w0p) * traj.config.wSwitch;
  c.c3 = lm.zInf && std::isfinite(*lm.zInf) && *lm.zInf < 0.0 && std::abs(*lm.zInf) <= cap;

  if (!c.c1) {
    c.verdict = Verdict::Multimodal;
    c.evidence = "C1 fails: " + std::to_string(lm.nCriticalPoints) + " extrema before r0, " +
                 std::to_string(lm.extremaBeyondZero) + " after";
  } else if (!c.c3) {
    c.verdict = Verdict::NonNegativeDisplacement;
    c.evidence = "C3 fails: z_inf = " + std::to_string(lm.zInf.value_or(kNaN));
  } else {
    c.verdict = Verdict::Biconcave;
    c.evidence = "C1, C2, C3 hold";
  }
  return c;
}

double etaChartA(double r, double w, double wp, const HelfrichParams& params) {
  const double s = 1.0 + w * w;
  const double rs = std::sqrt(s);
  return r * wp * wp / (s * s * rs) - w * w / (r * rs) - 2.0 * params.c0 * w - params.a1() * r * rs +
         0.5 * params.p * r * r * w;
}

double etaTimesSlopeChartB(double u, double up, double upp, const HelfrichParams& params) {
  const double s = 1.0 + up * up;
  const double rs = std::sqrt(s);
  return u * upp * upp / (s * s * rs) - 1.0 / (u * rs) + 2.0 * params.c0 - params.a1() * u * rs -
         0.5 * params.p * u * u;
}

GeometrySample geometryAt(const Trajectory& traj, double r) {
  if (r == 0.0) return axisSample(traj);
  if (!(r >= traj.rBegin() && r <= traj.rEnd()))
    throw Error(ErrorCode::OutOfRange, "r = " + std::to_string(r) + " outside chart A");
  const StateVector y = traj.stateA(r);
  GeometrySample g;
  g.r = r;
  g.z = y(slot::Z);
  g.w = y(slot::W);
  const Curvatures k = curvaturesChartA(r, g.w, y(slot::Wp));
  g.kappaMeridional = k.meridional;
  g.kappaLongitudinal = k.longitudinal;
  g.H = k.mean();
  g.K = k.gaussian();
  g.eta = etaChartA(r, g.w, y(slot::Wp), traj.params);
  return g;
}

GeometrySample geometryAtZ(const Trajectory& traj, double z) {
  if (!traj.hasChartB()) throw Error(ErrorCode::OutOfRange, "trajectory has no chart-B segment");
  const double hi = traj.zBegin(), lo = traj.zEnd();
  if (!(z >= lo && z <= hi)) throw Error(ErrorCode::OutOfRange, "z = " + std::to_string(z) + " outside chart B");
  const StateVector y = traj.stateB(z);
  const double u = y(slot::U), q = y(slot::Up), upp = y(slot::Upp);
  GeometrySample g;
  g.r = u;
  g.z = z;
  // the terminal sample of an equator run is the equator itself
  const bool equator = z == lo && traj.status == TrajectoryStatus::Equator;
  g.w = q != 0.0 && !equator ? 1.0 / q : -std::numeric_limits<double>::infinity();
  const Curvatures k = curvaturesChartB(u, q, upp);
  g.kappaMeridional = k.meridional;
  g.kappaLongitudinal = k.longitudinal;
  g.H = k.mean();
  g.K = k.gaussian();
  g.eta = q != 0.0 && !equator ? etaTimesSlopeChartB(u, q, upp, traj.params) / std::abs(q) : kNaN;
  return g;
}

VariationResidual shapeResidual(double r, double w, double wp, double wpp, const HelfrichParams& params) {
  const double s = 1.0 + w * w;
  const double rs = std::sqrt(s);
  const double s52 = s * s * rs;
  const double terms[] = {
      -2.0 * r * wpp / s52,
      5.0 * r * w * wp * wp / (s52 * s),
      -2.0 * wp / s52,
      (2.0 * w + w * w * w) / (r * s * rs),
      2.0 * params.c0 * w * w / s,
      params.a1() * r * w / rs,
      -0.5 * params.p * r * r,
  };
  VariationResidual out;
  for (double t : terms) {
    out.value += t;
    out.scale = std::max(out.scale, std::abs(t));
  }
  return out;
}

double elResidual(const Trajectory& traj, int samples) {
  if (traj.chartA.empty()) return 0.0;
  const double a = traj.rBegin(), b = traj.rEnd();
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double r = a + (b - a) * (double(i) / samples);
    const StateVector y = traj.stateA(r);
    const double wpp = traj.derivativeA(r)(slot::Wp);
    const VariationResidual res = shapeResidual(r, y(slot::W), y(slot::Wp), wpp, traj.params);
    if (res.scale > 0.0) worst = std::max(worst, std::abs(res.value) / res.scale);
  }
  return worst;
}

double equatorIdentityResidual(const Trajectory& traj) {
  const Event& eq = requireEvent(traj, EventKind::Equator);
  const double r = eq.state(slot::U);
  const Curvatures k = curvaturesChartB(r, eq.state(slot::Up), eq.state(slot::Upp));
  const double K = k.gaussian();
  const double target = -evalQ(-1.0 / r, traj.params) / r;
  return std::abs(K * K - target) / std::max(K * K, 1e-30);
}

EtaReport etaBoundedness(const Trajectory& traj) {
  requireEvent(traj, EventKind::Equator);
  const double zEq = traj.zEnd();
  const double span = traj.zBegin() - zEq;

  EtaReport rep;
  auto sampleAt = [&](double x, double& eta, double& etaSlope) {
    const StateVector y = traj.stateB(zEq + x);
    etaSlope = etaTimesSlopeChartB(y(slot::U), y(slot::Up), y(slot::Upp), traj.params);
    eta = etaSlope / std::abs(y(slot::Up));
  };

  // Uniform pass over the whole chart-B segment for the running sup.
  for (int i = 0; i < 1000; ++i) {
    double eta, etaSlope;
    sampleAt(span * (1.0 - double(i) / 1000.0), eta, etaSlope);
    rep.supEta = std::max(rep.supEta, std::abs(eta));
  }

  // Geometric approach x = span * 10^{-k/10}, k = 0..50.
  std::vector<double> xs, etas, slopes;
  for (int k = 0; k <= 50; ++k) {
    const double x = span * std::pow(10.0, -k / 10.0);
    double eta, etaSlope;
    sampleAt(x, eta, etaSlope);
    xs.push_back(x);
    etas.push_back(eta);
    slopes.push_back(etaSlope);
    rep.supEta = std::max(rep.supEta, std::abs(eta));
  }

  // Divergence: |eta| growing monotonically by more than 10x over the last
  // two decades (k = 30..50).
  bool monotone = true;
  for (int k = 31; k <= 50; ++k)
    if (std::abs(etas[k]) < std::abs(etas[k - 1])) monotone = false;
  rep.diverging = monotone && std::abs(etas[50]) > 10.0 * std::abs(etas[30]);

  // Linear extrapolation to x = 0 over the decade k = 30..40.
  const std::vector<double> fx(xs.begin() + 30, xs.begin() + 41);
  rep.etaAtEquatorExtrapolated = interceptFit(fx, std::vector<double>(etas.begin() + 30, etas.begin() + 41));
  rep.etaTimesSlopeExtrapolated = interceptFit(fx, std::vector<double>(slopes.begin() + 30, slopes.begin() + 41));
  return rep;
}

SurfaceTotals surfaceTotals(const Trajectory& traj) {
  const Event& eq = requireEvent(traj, EventKind::Equator);
  const double pi = std::numbers::pi;
  SurfaceTotals t;
  t.area = 4.0 * pi * eq.state(slot::Area);
  t.volume = -2.0 * pi * eq.state(slot::Volume);
  t.bendingEnergy = 4.0 * pi * eq.state(slot::Energy);
  t.helfrichEnergy = t.bendingEnergy + traj.params.p * t.volume;
  return t;
}

std::vector<ProfilePoint> halfProfile(const Trajectory& traj, int n) {
  const Event& eq = requireEvent(traj, EventKind::Equator);
  if (n < 4) throw Error(ErrorCode::InvalidConfig, "profile needs at least 4 samples");
  const double zInf = eq.location;
  const double rEnd = traj.rEnd();
  const double arcA = traj.stateA(rEnd)(slot::Arc);
  const double arcB = eq.state(slot::Arc) - arcA;
  int nA = int(std::lround(n * arcA / (arcA + arcB)));
  nA = std::clamp(nA, 2, n - 2);
  const int nB = n - nA;

  std::vector<ProfilePoint> out;
  out.reserve(std::size_t(n));
  for (int i = 0; i < nA; ++i) {
    const double r = i == 0 ? 0.0 : std::max(traj.rBegin(), rEnd * double(i) / nA);
    const GeometrySample g = geometryAt(traj, r);
    out.push_back({g.r, g.z - zInf, g});
  }
  const double z0 = traj.zBegin();
  for (int j = 0; j < nB; ++j) {
    const double z = j == nB - 1 ? zInf : z0 + (zInf - z0) * double(j) / (nB - 1);
    const GeometrySample g = geometryAtZ(traj, z);
    out.push_back({g.r, g.z - zInf, g});
  }
  out.back().height = 0.0;
  return out;
}

std::vector<Eigen::Vector2d> mirrorHalfProfile(const std::vector<Eigen::Vector2d>& half) {
  const int m = int(half.size());
  std::vector<Eigen::Vector2d> curve;
  curve.reserve(std::size_t(4 * m));
  for (int i = 0; i < m; ++i) curve.emplace_back(half[i].x(), half[i].y());
  for (int i = m - 2; i >= 0; --i) curve.emplace_back(half[i].x(), -half[i].y());
  for (int i = 1; i < m; ++i) curve.emplace_back(-half[i].x(), -half[i].y());
  for (int i = m - 2; i >= 1; --i) curve.emplace_back(-half[i].x(), half[i].y());
  curve.push_back(curve.front());
  return curve;
}

std::vector<Eigen::Vector2d> profile(const Trajectory& traj, int n) {
  const Classification cls = classify(traj, extractLandmarks(traj));
  if (cls.verdict != Verdict::Biconcave)
    throw Error(ErrorCode::NotBiconcave, "profile requested for a " + std::string(toString(cls.verdict)) + " solution");
  std::vector<Eigen::Vector2d> half;
  for (const auto& pt : halfProfile(traj, n)) half.emplace_back(pt.r, pt.height);
  return mirrorHalfProfile(half);
}

}  // namespace helfrich
