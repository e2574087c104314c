#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "helfrich/dormand_prince.hpp"
#include "helfrich/errors.hpp"
#include "helfrich/param_analysis.hpp"

namespace helfrich {

/// Integrated state, shared layout for both charts.
///
/// chart A (independent variable r):  [w, w', z, s, area, volume, energy]
/// chart B (independent variable z):  [u, u', u'', s, area, volume, energy]
///
/// s is arclength along the profile; area, volume and energy accumulate
///   int r sqrt(1+w^2) dr,  int r^2 w dr,  int [(2H+c0)^2 + lambda] r sqrt(1+w^2) dr
/// and continue unchanged in meaning through chart B.
using StateVector = Eigen::Matrix<double, 7, 1>;
using Step = DenseStep<7>;

namespace slot {
inline constexpr int W = 0, Wp = 1, Z = 2;
inline constexpr int U = 0, Up = 1, Upp = 2;
inline constexpr int Arc = 3, Area = 4, Volume = 5, Energy = 6;
}  // namespace slot

struct ChartAState {
  double r = 0.0;
  double w = 0.0;
  double wp = 0.0;
  double z = 0.0;
  double arclength = 0.0;
  double areaAcc = 0.0;
  double volAcc = 0.0;
  double energyAcc = 0.0;

  StateVector vector() const;
  static ChartAState fromVector(double r, const StateVector& y);
};

struct ChartBState {
  double z = 0.0;
  double u = 0.0;
  double up = 0.0;
  double upp = 0.0;
  double arclength = 0.0;
  double areaAcc = 0.0;
  double volAcc = 0.0;
  double energyAcc = 0.0;

  StateVector vector() const;
  static ChartBState fromVector(double z, const StateVector& y);
};

// ---------------------------------------------------------------------------
// Scalar kernels. Templated so the test oracles can run them in extended
// precision.

/// w'' from the shape equation, solved explicitly:
///   w'' = 5 w w'^2 / (2s) - w'/r + (2w + w^3) s / (2 r^2) + c0 w^2 s^{3/2} / r
///         + (c0^2 + lambda) w s^2 / 2 - p r s^{5/2} / 4,      s = 1 + w^2
template <typename Scalar>
Scalar shapeSecondDerivative(const Scalar& r, const Scalar& w, const Scalar& wp,
                             const HelfrichParams& params) {
  using std::sqrt;
  const Scalar c0(params.c0), a1(params.a1()), p(params.p);
  const Scalar s = Scalar(1) + w * w;
  const Scalar rs = sqrt(s);
  // -w'/r + (2w + w^3) s / (2r^2) grouped over a common denominator; the two
  // pieces are each O(1/r) near the axis and cancel to O(r).
  const Scalar axis = (w * (Scalar(2) + w * w) * s - Scalar(2) * r * wp) / (Scalar(2) * r * r);
  return Scalar(5) * w * wp * wp / (Scalar(2) * s) + axis + c0 * w * w * s * rs / r +
         a1 * w * s * s / Scalar(2) - p * r * s * s * rs / Scalar(4);
}

/// u''' for the inverse graph r = u(z), with q = u' < 0 before the equator.
/// Obtained from the shape equation through w = 1/q, w' = -u''/q^3; |q| is
/// replaced by -q so the expression continues analytically across q = 0.
///   u''' = N / q,
///   N = u''^2 (1 + 6q^2) / (2(1+q^2)) - q^2 u''/u - (1+2q^2)(1+q^2)/(2u^2)
///       + c0 (1+q^2)^{3/2}/u - (c0^2+lambda)(1+q^2)^2/2 - p u (1+q^2)^{5/2}/4
template <typename Scalar>
Scalar chartBNumerator(const Scalar& u, const Scalar& q, const Scalar& upp,
                       const HelfrichParams& params) {
  using std::sqrt;
  const Scalar c0(params.c0), a1(params.a1()), p(params.p);
  const Scalar q2 = q * q;
  const Scalar s = Scalar(1) + q2;
  const Scalar rs = sqrt(s);
  return upp * upp * (Scalar(1) + Scalar(6) * q2) / (Scalar(2) * s) - q2 * upp / u -
         (Scalar(1) + Scalar(2) * q2) * s / (Scalar(2) * u * u) + c0 * s * rs / u -
         a1 * s * s / Scalar(2) - p * u * s * s * rs / Scalar(4);
}

template <typename Scalar>
Scalar chartBThirdDerivative(const Scalar& u, const Scalar& q, const Scalar& upp,
                             const HelfrichParams& params) {
  return chartBNumerator(u, q, upp, params) / q;
}

/// kappa'' from the equation for the meridional curvature kappa = w/(r sqrt(1+w^2)):
///   r kappa'' = -r kappa (r kappa' + kappa)^2 / (2(1 - r^2 kappa^2)) - 3 kappa'
///               + r Q(kappa) / (2(1 - r^2 kappa^2))
double rhsKappa(double r, double kappa, double kappap, const HelfrichParams& params);

// ---------------------------------------------------------------------------

/// Meridional and longitudinal principal curvatures in graph variables.
struct Curvatures {
  double meridional = 0.0;
  double longitudinal = 0.0;
  double mean() const { return 0.5 * (meridional + longitudinal); }
  double gaussian() const { return meridional * longitudinal; }
};

Curvatures curvaturesChartA(double r, double w, double wp);
Curvatures curvaturesChartB(double u, double up, double upp);

/// Right-hand sides of the full integrated systems (state + quadratures).
StateVector rhsChartA(double r, const StateVector& y, const HelfrichParams& params);
StateVector rhsChartB(double z, const StateVector& y, const HelfrichParams& params);

/// A profile ODE in both charts. The shape equation is the production
/// model; constant-curvature profiles exercise the same quadrature path.
class ProfileModel {
 public:
  virtual ~ProfileModel() = default;
  virtual StateVector chartA(double r, const StateVector& y) const = 0;
  virtual StateVector chartB(double z, const StateVector& y) const = 0;
  /// Both principal curvatures at r = 0.
  virtual double axisCurvature() const = 0;
  virtual const HelfrichParams& params() const = 0;
};

class ShapeEquation final : public ProfileModel {
 public:
  ShapeEquation(const HelfrichParams& params, double w0p) : params_(params), w0p_(w0p) {}
  StateVector chartA(double r, const StateVector& y) const override { return rhsChartA(r, y, params_); }
  StateVector chartB(double z, const StateVector& y) const override { return rhsChartB(z, y, params_); }
  double axisCurvature() const override { return w0p_; }
  const HelfrichParams& params() const override { return params_; }

 private:
  HelfrichParams params_;
  double w0p_;
};

/// Round sphere of the given radius written as z(r) = sqrt(R^2 - r^2) - R.
/// Only the profile ODE differs from the shape equation; the quadratures
/// use params.c0 and params.lambda in the energy integrand.
class SphereProfile final : public ProfileModel {
 public:
  explicit SphereProfile(double radius, const HelfrichParams& params = {}) : radius_(radius), params_(params) {}
  StateVector chartA(double r, const StateVector& y) const override;
  StateVector chartB(double z, const StateVector& y) const override;
  double axisCurvature() const override { return -1.0 / radius_; }
  const HelfrichParams& params() const override { return params_; }

  /// Exact state at a small radius eps.
  ChartAState startState(double eps) const;

 private:
  double radius_;
  HelfrichParams params_;
};

// ---------------------------------------------------------------------------

struct SolverConfig {
  double relTol = 1e-10;
  double absTol = 1e-12;
  std::optional<double> epsStart;  // default min(1e-5, 1e-3 sqrt(32 w0p / (3p)))
  double wSwitch = 10.0;
  std::optional<double> rMax;      // default 1e3 sqrt(w0p/p + 1)
  long maxSteps = 1000000;
  double eventTol = 1e-12;

  double resolvedEpsStart(const HelfrichParams& params, double w0p) const;
  double resolvedRMax(const HelfrichParams& params, double w0p) const;
  void validate() const;
};

/// Coefficient of r^3 in the axis expansion w = w0p r + a3 r^3 + O(r^5).
double seriesCoefficient(const HelfrichParams& params, double w0p);

/// Chart-A state at r = eps from the truncated axis expansion.
ChartAState seriesStart(const HelfrichParams& params, double w0p, double eps);

/// Handover from the graph chart to the inverse-graph chart; requires w < 0.
ChartBState chartSwitch(const ChartAState& a);

// ---------------------------------------------------------------------------

enum class EventKind { MaxOfW, ZeroOfW, ChartSwitch, Equator, BlowUpPositive, Aborted };
enum class Chart { A, B };
enum class TrajectoryStatus { Equator, BlowUpPositive, Aborted };

std::string_view toString(EventKind kind);
std::string_view toString(TrajectoryStatus status);

struct Event {
  EventKind kind = EventKind::Aborted;
  Chart chart = Chart::A;
  double location = 0.0;  // r in chart A, z in chart B
  StateVector state = StateVector::Zero();
};

/// Dense, event-annotated solution spanning both charts.
struct Trajectory {
  HelfrichParams params;
  double w0p = 0.0;
  double axisCurvature = 0.0;
  SolverConfig config;
  ChartAState start;
  std::vector<Step> chartA;
  std::vector<Step> chartB;
  std::vector<Event> events;
  TrajectoryStatus status = TrajectoryStatus::Aborted;
  std::string detail;
  long stepCount = 0;

  const Event* find(EventKind kind) const;

  double rBegin() const { return start.r; }
  double rEnd() const;
  bool hasChartB() const { return !chartB.empty(); }
  double zBegin() const;  // chart-B start (switch point)
  double zEnd() const;    // chart-B end, decreasing from zBegin

  StateVector stateA(double r) const;
  StateVector derivativeA(double r) const;
  StateVector stateB(double z) const;
  StateVector derivativeB(double z) const;
};

Trajectory integrate(const HelfrichParams& params, double w0p, const SolverConfig& cfg = {});

/// Integrates an arbitrary profile model from a prepared chart-A state.
Trajectory integrateProfile(const ProfileModel& model, const ChartAState& start, const SolverConfig& cfg,
                            double w0p);

}  // namespace helfrich
