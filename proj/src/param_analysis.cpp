#include "helfrich/param_analysis.hpp"

#include <algorithm>
#include <limits>

#include "helfrich/errors.hpp"

namespace helfrich {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Rounding-level magnitude of Q(t): sum of the absolute values of its terms.
double termScale(double t, const HelfrichParams& params) {
  const double at = std::abs(t);
  return at * at * at + std::abs(params.a2()) * at * at + std::abs(params.a1()) * at +
         std::abs(params.a0());
}

std::vector<double> quadraticRoots(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-b / (2.0 * a)};
  const double s = std::sqrt(disc);
  if (b == 0.0) return {-s / (2.0 * a), s / (2.0 * a)};
  const double q = -0.5 * (b + std::copysign(s, b));
  double r1 = q / a;
  double r2 = c / q;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

// Q is monotone on [lo, hi] with a sign change; safeguarded Newton with a
// bisection fallback.
double polishRoot(double lo, double hi, const HelfrichParams& params) {
  double flo = evalQ(lo, params);
  if (flo == 0.0) return lo;
  if (evalQ(hi, params) == 0.0) return hi;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = evalQ(x, params);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double dfx = evalQPrime(x, params);
    double next = dfx != 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * kEps * std::max(1.0, std::abs(x)) || hi - lo <= 4.0 * kEps * std::max(1.0, std::abs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

bool vanishesAt(double t, const HelfrichParams& params) {
  return std::abs(evalQ(t, params)) <= 64.0 * kEps * termScale(t, params);
}

}  // namespace

double CubicAnalysis::smallestPositiveRoot() const {
  for (const auto& root : realRoots)
    if (root.value > 0.0) return root.value;
  return std::numeric_limits<double>::quiet_NaN();
}

CubicAnalysis analyzeCubic(const HelfrichParams& params) {
  CubicAnalysis out;
  out.criticalPoints = quadraticRoots(3.0, 2.0 * params.a2(), params.a1());

  const double bound =
      1.0 + std::max({std::abs(params.a2()), std::abs(params.a1()), std::abs(params.a0())});
  const auto& crit = out.criticalPoints;

  auto push = [&](double value, int multiplicity) { out.realRoots.push_back({value, multiplicity}); };

  if (crit.size() < 2) {
    // Q is monotone increasing; a single critical point is an inflection.
    if (crit.size() == 1 && vanishesAt(crit[0], params)) {
      push(crit[0], 3);
    } else {
      push(polishRoot(-bound, bound, params), 1);
    }
  } else {
    const double localMax = crit[0];
    const double localMin = crit[1];
    const double qMax = evalQ(localMax, params);
    const double qMin = evalQ(localMin, params);
    const bool maxIsRoot = vanishesAt(localMax, params);
    const bool minIsRoot = vanishesAt(localMin, params);

    if (maxIsRoot) {
      push(localMax, 2);
    } else if (qMax > 0.0) {
      push(polishRoot(-bound, localMax, params), 1);
    }
    if (!maxIsRoot && !minIsRoot && qMax > 0.0 && qMin < 0.0) {
      push(polishRoot(localMax, localMin, params), 1);
    }
    if (minIsRoot) {
      push(localMin, 2);
    } else if (qMin < 0.0) {
      push(polishRoot(localMin, bound, params), 1);
    }
  }

  out.allRootsPositive = !out.realRoots.empty() &&
                         std::all_of(out.realRoots.begin(), out.realRoots.end(),
                                     [](const RealRoot& r) { return r.value > 0.0; });
  return out;
}

DerivedConstants derivedConstants(const HelfrichParams& params, double w0p) {
  if (!(w0p > 0.0) || !std::isfinite(w0p))
    throw Error(ErrorCode::InvalidSlope, "initial slope must be positive and finite");

  const auto crit = quadraticRoots(3.0, 2.0 * params.a2(), params.a1());

  double qMin = std::min(evalQ(0.0, params), evalQ(w0p, params));
  double qMax = std::max(evalQ(0.0, params), evalQ(w0p, params));
  for (double t : crit) {
    if (t > 0.0 && t < w0p) {
      qMin = std::min(qMin, evalQ(t, params));
      qMax = std::max(qMax, evalQ(t, params));
    }
  }

  // Q -> -inf as t -> -inf, so the supremum over t <= 0 is attained at 0 or
  // at a negative critical point.
  double qSupNeg = evalQ(0.0, params);
  for (double t : crit)
    if (t < 0.0) qSupNeg = std::max(qSupNeg, evalQ(t, params));

  DerivedConstants out;
  out.w0p = w0p;
  out.mu = -qMin;
  out.deltaPlus = -qMax;
  out.deltaMinus = -qSupNeg;
  out.xi = out.deltaPlus > 0.0 ? 1.0 - 64.0 * w0p * w0p * w0p / (27.0 * out.deltaPlus)
                               : -std::numeric_limits<double>::infinity();
  out.delta = std::min(out.deltaPlus / 8.0, out.deltaMinus / 2.0);
  return out;
}

}  // namespace helfrich
