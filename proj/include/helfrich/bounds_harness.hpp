#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "helfrich/param_analysis.hpp"
#include "helfrich/shape_ode.hpp"
#include "helfrich/solution_analysis.hpp"

namespace helfrich {

enum class CheckStatus { Pass, Fail, Skipped, Info };
std::string_view toString(CheckStatus status);

/// One inequality evaluated on a run. margin = rhs - lhs for upper bounds
/// (lhs - rhs for lower bounds); the check passes iff margin >= -tol
/// (margin > 0 for strict sign checks). A failed hypothesis always yields
/// Skipped.
struct CheckRecord {
  std::string checkId;
  bool hypothesisSatisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tol = 0.0;
  CheckStatus status = CheckStatus::Skipped;
  std::string note;
};

struct BoundsReport {
  std::vector<CheckRecord> checks;

  const CheckRecord* find(std::string_view id) const;
  /// No Fail among the non-informational records.
  bool passed() const;
};

/// Hypotheses used by the estimates.
struct Hypotheses {
  bool rootsPositive = false;  // every real root of Q positive, p > 0
  bool qNegative = false;      // Q < 0 on [0, w0p]
  bool rNegative = false;      // R < 0 on [0, w0p]
  bool xiPositive = false;
  bool deltaMinusPositive = false;
};

Hypotheses evaluateHypotheses(const HelfrichParams& params, const DerivedConstants& consts);

/// int_0^{r0} w dr.
double positiveLobeIntegral(const Trajectory& traj, const Landmarks& landmarks);
/// int_{r0}^{r_inf} |w| dr = z(r0) - z_inf.
double negativeLobeIntegral(const Trajectory& traj, const Landmarks& landmarks);

BoundsReport checkSingle(const Trajectory& traj, const Landmarks& landmarks, const HelfrichParams& params,
                         const DerivedConstants& consts);

/// Everything computed for one initial slope.
struct PointRun {
  double w0p = 0.0;
  Landmarks landmarks;
  Classification classification;
  double positiveIntegral = 0.0;       // int_0^{r0} w, NaN without r0
  double negativeIntegral = 0.0;       // int_{r0}^{r_inf} |w|, NaN without an equator
  std::optional<BoundsReport> bounds;  // Biconcave runs only
  std::string error;                   // solver failure, if any
};

PointRun runPoint(const HelfrichParams& params, double w0p, const SolverConfig& cfg);
std::vector<PointRun> runPoints(const HelfrichParams& params, const std::vector<double>& grid,
                                const SolverConfig& cfg);

/// Geometric grid from `first` to `last` inclusive.
std::vector<double> geometricGrid(double first, double last, int count);

struct AsymptoticBands {
  double cutoff = 1e-2;        // bands apply at w0p <= cutoff
  double lowerFactor = 0.9;    // r_M^2/w0p >= lowerFactor * 32/(3p)
  double upperFactor = 1.1;    // r0^2/w0p <= upperFactor * 32/p
  double slopeLow = -2.2;      // w'(r0)/w0p in [slopeLow, slopeHigh]
  double slopeHigh = -0.60;
  double areaFactor = 1.1;     // (1/w0p^2) int_0^{r0} w <= areaFactor * 8/p
  int areaPoints = 2;          // ...at this many smallest grid points inside the cutoff
};

struct AsymptoticPoint {
  double w0p = 0.0;
  Verdict verdict = Verdict::Indeterminate;
  double rMRatio = 0.0;        // r_M^2 / w0p
  double r0Ratio = 0.0;        // r0^2 / w0p
  double slopeRatio = 0.0;     // w'(r0) / w0p
  double positiveArea = 0.0;   // (1/w0p^2) int_0^{r0} w
  double negativeArea = 0.0;   // (1/w0p) int_{r0}^{r_inf} |w|
  bool inBand = false;         // w0p <= cutoff
  bool rMOk = true;
  bool r0Ok = true;
  bool slopeOk = true;
  bool areaChecked = false;
  bool areaOk = true;
  bool orderedOk = true;       // r_M^2 <= r0^2
};

/// Least-squares line ratio = intercept + slope * w0p over the in-band points;
/// the intercept estimates the w0p -> 0 limit.
struct Trend {
  double intercept = 0.0;
  double slope = 0.0;
};

struct AsymptoticReport {
  double p = 0.0;
  AsymptoticBands bands;
  std::vector<AsymptoticPoint> points;  // Biconcave points only
  std::vector<double> excluded;         // w0p values that did not classify Biconcave
  double limitRM = 0.0;                 // 32/(3p)
  double limitR0 = 0.0;                 // 32/p
  double limitSlopeLow = -2.0;
  double limitSlopeHigh = -2.0 / 3.0;
  double limitArea = 0.0;               // 8/p
  double negativeAreaInfimum = 0.0;     // empirical lower constant for int |w| / w0p
  Trend rMTrend, r0Trend, slopeTrend, positiveAreaTrend;
  bool passed = false;
};

AsymptoticReport summarizeAsymptotics(const HelfrichParams& params, const std::vector<PointRun>& runs,
                                      const AsymptoticBands& bands = {});
AsymptoticReport asymptoticSweep(const HelfrichParams& params, const std::vector<double>& grid,
                                 const SolverConfig& cfg, const AsymptoticBands& bands = {});

struct PhaseCell {
  HelfrichParams params;
  double w0p = 0.0;
};

struct PhaseRow {
  PhaseCell cell;
  Verdict verdict = Verdict::Indeterminate;
  Landmarks landmarks;
  bool rootsAllPositive = false;
  bool inHypothesis = false;  // all roots positive, p > 0, w0p below the smallest root
  bool anomaly = false;       // in hypothesis, not Biconcave at w0p nor at w0p/10
  std::string error;
};

std::vector<PhaseRow> phaseSweep(const std::vector<PhaseCell>& cells, const SolverConfig& cfg);

/// Runs fn(i) for i in [0, n) on a small worker pool. Results must be
/// written by index.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace helfrich
