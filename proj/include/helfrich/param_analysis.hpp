#pragma once

#include <cmath>
#include <vector>

namespace helfrich {

/// Physical parameters of the Helfrich functional: spontaneous curvature
/// c0, tensile stress lambda and osmotic pressure difference p.
struct HelfrichParams {
  double c0 = 0.0;
  double lambda = 0.0;
  double p = 0.0;

  /// Coefficients of Q(t) = t^3 + a2 t^2 + a1 t + a0.
  double a2() const { return 2.0 * c0; }
  double a1() const { return c0 * c0 + lambda; }
  double a0() const { return -0.5 * p; }
};

/// Q(t) = t^3 + 2 c0 t^2 + (c0^2 + lambda) t - p/2, Horner order.
template <typename Scalar>
Scalar evalQ(const Scalar& t, const HelfrichParams& params) {
  const Scalar a2(params.a2()), a1(params.a1()), a0(params.a0());
  return ((t + a2) * t + a1) * t + a0;
}

/// R(t) = Q(t) - t^3.
template <typename Scalar>
Scalar evalR(const Scalar& t, const HelfrichParams& params) {
  const Scalar a2(params.a2()), a1(params.a1()), a0(params.a0());
  return (a2 * t + a1) * t + a0;
}

template <typename Scalar>
Scalar evalQPrime(const Scalar& t, const HelfrichParams& params) {
  return (Scalar(3) * t + Scalar(2) * Scalar(params.a2())) * t + Scalar(params.a1());
}

struct RealRoot {
  double value = 0.0;
  int multiplicity = 1;
};

struct CubicAnalysis {
  std::vector<RealRoot> realRoots;      // ascending, one entry per distinct value
  bool allRootsPositive = false;
  std::vector<double> criticalPoints;   // real roots of Q', ascending

  /// Smallest positive real root, or NaN when there is none.
  double smallestPositiveRoot() const;
};

CubicAnalysis analyzeCubic(const HelfrichParams& params);

/// Extremal values of -Q that control the quantitative estimates for the
/// initial slope w0p.
struct DerivedConstants {
  double mu = 0.0;          // max{-Q(t) : 0 <= t <= w0p}
  double deltaPlus = 0.0;   // min{-Q(t) : 0 <= t <= w0p}
  double deltaMinus = 0.0;  // min{-Q(t) : t <= 0}
  double xi = 0.0;          // 1 - 64 w0p^3 / (27 deltaPlus); -inf when deltaPlus <= 0
  double delta = 0.0;       // min{deltaPlus/8, deltaMinus/2}
  double w0p = 0.0;
};

DerivedConstants derivedConstants(const HelfrichParams& params, double w0p);

}  // namespace helfrich
