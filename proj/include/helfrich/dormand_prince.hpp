#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

namespace helfrich {

/// One accepted step of the Dormand-Prince 5(4) pair together with the
/// coefficients of its quartic continuous extension.
///
/// y(t0 + theta*h) = c0 + theta*(c1 + (1-theta)*(c2 + theta*(c3 + (1-theta)*c4)))
template <int N, typename Scalar = double>
struct DenseStep {
  using Vector = Eigen::Matrix<Scalar, N, 1>;

  Scalar t0 = 0;
  Scalar h = 0;
  Scalar tEnd = 0;  // t0 + h unless the step was cut at a terminal event
  Eigen::Matrix<Scalar, N, 5> coeffs;

  Scalar theta(Scalar t) const { return (t - t0) / h; }

  Vector value(Scalar t) const {
    const Scalar th = theta(t);
    const Scalar th1 = Scalar(1) - th;
    return coeffs.col(0) +
           th * (coeffs.col(1) + th1 * (coeffs.col(2) + th * (coeffs.col(3) + th1 * coeffs.col(4))));
  }

  /// d/dt of the interpolant.
  Vector derivative(Scalar t) const {
    const Scalar th = theta(t);
    const Scalar th1 = Scalar(1) - th;
    const Vector a = coeffs.col(3) + th1 * coeffs.col(4);
    const Vector da = -coeffs.col(4);
    const Vector b = coeffs.col(2) + th * a;
    const Vector db = a + th * da;
    const Vector c = coeffs.col(1) + th1 * b;
    const Vector dc = -b + th1 * db;
    return (c + th * dc) / h;
  }

  bool contains(Scalar t) const {
    const Scalar lo = std::min(t0, tEnd), hi = std::max(t0, tEnd);
    return t >= lo && t <= hi;
  }
};

/// Result of a single trial step.
template <int N, typename Scalar = double>
struct TrialStep {
  Eigen::Matrix<Scalar, N, 1> y;
  Eigen::Matrix<Scalar, N, 1> dydt;  // f(t+h, y), reused as k1 of the next step (FSAL)
  Scalar errorNorm = 0;
  DenseStep<N, Scalar> dense;
};

/// Dormand-Prince 5(4) embedded pair with the 4th-order dense output of
/// Hairer, Norsett & Wanner. Works with any callable f(t, y) -> dy/dt and
/// signed step sizes.
template <int N, typename Scalar = double>
class DormandPrince {
 public:
  using Vector = Eigen::Matrix<Scalar, N, 1>;

  DormandPrince(Scalar relTol, Scalar absTol) : relTol_(relTol), absTol_(absTol) {}

  template <typename Rhs>
  TrialStep<N, Scalar> step(const Rhs& f, Scalar t, const Vector& y, const Vector& k1, Scalar h) const {
    const Scalar c2 = Scalar(1) / 5, c3 = Scalar(3) / 10, c4 = Scalar(4) / 5, c5 = Scalar(8) / 9;
    const Scalar a21 = Scalar(1) / 5;
    const Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
    const Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
    const Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187, a53 = Scalar(64448) / 6561,
                 a54 = Scalar(-212) / 729;
    const Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33, a63 = Scalar(46732) / 5247,
                 a64 = Scalar(49) / 176, a65 = Scalar(-5103) / 18656;
    const Scalar a71 = Scalar(35) / 384, a73 = Scalar(500) / 1113, a74 = Scalar(125) / 192,
                 a75 = Scalar(-2187) / 6784, a76 = Scalar(11) / 84;
    const Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695, e4 = Scalar(71) / 1920,
                 e5 = Scalar(-17253) / 339200, e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;
    const Scalar d1 = Scalar(-12715105075.0) / Scalar(11282082432.0),
                 d3 = Scalar(87487479700.0) / Scalar(32700410799.0),
                 d4 = Scalar(-10690763975.0) / Scalar(1880347072.0),
                 d5 = Scalar(701980252875.0) / Scalar(199316789632.0),
                 d6 = Scalar(-1453857185.0) / Scalar(822651844.0),
                 d7 = Scalar(69997945.0) / Scalar(29380423.0);

    const Vector k2 = f(t + c2 * h, Vector(y + h * a21 * k1));
    const Vector k3 = f(t + c3 * h, Vector(y + h * (a31 * k1 + a32 * k2)));
    const Vector k4 = f(t + c4 * h, Vector(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Vector k5 = f(t + c5 * h, Vector(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Vector k6 = f(t + h, Vector(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Vector y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vector k7 = f(t + h, y1);

    TrialStep<N, Scalar> out;
    out.y = y1;
    out.dydt = k7;
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    Scalar sum = 0;
    for (int i = 0; i < err.size(); ++i) {
      using std::abs;
      using std::max;
      const Scalar sc = absTol_ + relTol_ * max(abs(y(i)), abs(y1(i)));
      const Scalar ratio = err(i) / sc;
      sum += ratio * ratio;
    }
    using std::sqrt;
    out.errorNorm = sqrt(sum / Scalar(err.size()));
    if (!y1.allFinite() || !k7.allFinite()) out.errorNorm = std::numeric_limits<Scalar>::infinity();

    const Vector ydiff = y1 - y;
    const Vector bspl = h * k1 - ydiff;
    out.dense.t0 = t;
    out.dense.h = h;
    out.dense.tEnd = t + h;
    out.dense.coeffs.col(0) = y;
    out.dense.coeffs.col(1) = ydiff;
    out.dense.coeffs.col(2) = bspl;
    out.dense.coeffs.col(3) = ydiff - h * k7 - bspl;
    out.dense.coeffs.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    return out;
  }

  /// Proportional-integral step-size proposal (Gustafsson/Hairer constants).
  /// `previousError` is updated on acceptance.
  Scalar proposeStep(Scalar h, Scalar errorNorm, Scalar& previousError, bool accepted) const {
    using std::pow;
    constexpr double beta = 0.04, safe = 0.9;
    constexpr double expo = 0.2 - 0.75 * beta;
    if (!std::isfinite(static_cast<double>(errorNorm))) return h * Scalar(0.1);
    const Scalar fac11 = pow(std::max<Scalar>(errorNorm, Scalar(1e-30)), Scalar(expo));
    if (!accepted) return h / std::min<Scalar>(Scalar(10), fac11 / Scalar(safe));
    Scalar fac = fac11 / pow(previousError, Scalar(beta));
    fac = std::max<Scalar>(Scalar(0.1), std::min<Scalar>(Scalar(5), fac / Scalar(safe)));
    previousError = std::max<Scalar>(errorNorm, Scalar(1e-4));
    return h / fac;
  }

  Scalar relTol() const { return relTol_; }
  Scalar absTol() const { return absTol_; }

 private:
  Scalar relTol_;
  Scalar absTol_;
};

}  // namespace helfrich
