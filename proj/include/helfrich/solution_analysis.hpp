#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "helfrich/shape_ode.hpp"

namespace helfrich {

struct Landmarks {
  std::optional<double> rM;      // first maximum of w
  std::optional<double> wMax;
  std::optional<double> r0;      // first zero of w
  std::optional<double> wpAtR0;
  std::optional<double> rInf;    // equator radius
  std::optional<double> zInf;    // z at the equator = int_0^{r_inf} w dr
  int nCriticalPoints = 0;       // strict extrema of w on (0, r0)
  int extremaBeyondZero = 0;     // strict extrema of w after r0 (both charts)
};

/// Value of an optional landmark, or MissingEvent naming it.
double require(const std::optional<double>& value, const char* name);

Landmarks extractLandmarks(const Trajectory& traj);

enum class Verdict { Biconcave, BlowUpPositive, Multimodal, NonNegativeDisplacement, Indeterminate };
std::string_view toString(Verdict verdict);

struct Classification {
  Verdict verdict = Verdict::Indeterminate;
  bool c1 = false;  // unimodal
  bool c2 = false;  // finite-radius blow-down (equator reached)
  bool c3 = false;  // -inf < int_0^{r_inf} w dr < 0
  std::string evidence;
};

Classification classify(const Trajectory& traj, const Landmarks& landmarks);

struct GeometrySample {
  double r = 0.0;
  double z = 0.0;
  double w = 0.0;  // -inf at the equator
  double kappaMeridional = 0.0;
  double kappaLongitudinal = 0.0;
  double H = 0.0;
  double K = 0.0;
  double eta = 0.0;  // NaN exactly at the equator
};

/// Pointwise geometry in chart A, r in [rBegin, rEnd].
GeometrySample geometryAt(const Trajectory& traj, double r);
/// Pointwise geometry in chart B, z between zBegin and zEnd.
GeometrySample geometryAtZ(const Trajectory& traj, double z);

/// eta(r) of the reflection-plane boundary term, graph variables.
double etaChartA(double r, double w, double wp, const HelfrichParams& params);
/// eta * |u'| in inverse-graph variables; finite and regular at u' = 0.
double etaTimesSlopeChartB(double u, double up, double upp, const HelfrichParams& params);

/// Integrand of the first variation evaluated at (r, w, w', w'') and the
/// magnitude of its largest term.
struct VariationResidual {
  double value = 0.0;
  double scale = 0.0;
};
VariationResidual shapeResidual(double r, double w, double wp, double wpp, const HelfrichParams& params);

/// Max over chart-A samples of |integrand| / largest term, with w'' taken
/// from the derivative of the dense output.
double elResidual(const Trajectory& traj, int samples = 2000);

/// |K^2 - (-1/r)Q(-1/r)| / K^2 at the equator.
double equatorIdentityResidual(const Trajectory& traj);

struct EtaReport {
  double supEta = 0.0;
  double etaAtEquatorExtrapolated = 0.0;
  double etaTimesSlopeExtrapolated = 0.0;  // limit of eta |u'|, zero for stationary surfaces
  bool diverging = false;
};

EtaReport etaBoundedness(const Trajectory& traj);

struct SurfaceTotals {
  double area = 0.0;
  double volume = 0.0;
  double bendingEnergy = 0.0;   // int (2H + c0)^2 dS + lambda |Sigma|
  double helfrichEnergy = 0.0;  // bendingEnergy + p V
};

SurfaceTotals surfaceTotals(const Trajectory& traj);

/// One sample of the upper half profile, shifted so the equator sits at 0.
struct ProfilePoint {
  double r = 0.0;
  double height = 0.0;  // Z = z - z_inf
  GeometrySample geometry;
};

/// n samples from the axis to the equator: chart A uniform in r, chart B
/// uniform in z, split in proportion to arclength.
std::vector<ProfilePoint> halfProfile(const Trajectory& traj, int n);

/// Closed curve through the four mirror images of a half profile given as
/// (r, height) from the axis to the equator; the first point is repeated
/// at the end.
std::vector<Eigen::Vector2d> mirrorHalfProfile(const std::vector<Eigen::Vector2d>& half);

/// Closed mirrored cross-section through both halves; requires Biconcave.
std::vector<Eigen::Vector2d> profile(const Trajectory& traj, int n);

}  // namespace helfrich
