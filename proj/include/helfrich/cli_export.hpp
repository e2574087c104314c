#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "helfrich/bounds_harness.hpp"
#include "helfrich/param_analysis.hpp"
#include "helfrich/shape_ode.hpp"
#include "helfrich/solution_analysis.hpp"

namespace helfrich {

// ---------------------------------------------------------------------------
// Number formatting (locale independent)

/// 17 significant digits; round-trips every double.
std::string formatDouble(double value);
/// Shortest representation that round-trips.
std::string formatShortest(double value);
/// Strict parse of a whole string; nullopt on trailing garbage.
std::optional<double> parseDouble(const std::string& text);

// ---------------------------------------------------------------------------
// Files

/// r,z,w,kappa_m,kappa_l,H,K
void writeProfileCsv(std::ostream& os, const std::vector<GeometrySample>& rows);
std::vector<GeometrySample> readProfileCsv(std::istream& is);

/// Rows for profile.csv: axis to equator for runs that reach it, otherwise
/// the chart-A samples that exist.
std::vector<GeometrySample> profileRows(const Trajectory& traj, int n);

nlohmann::json toJson(const HelfrichParams& params);
nlohmann::json toJson(const SolverConfig& cfg);
nlohmann::json toJson(const DerivedConstants& consts);
nlohmann::json toJson(const Landmarks& landmarks);
nlohmann::json toJson(const Classification& cls);
nlohmann::json toJson(const SurfaceTotals& totals);
nlohmann::json toJson(const BoundsReport& report);
nlohmann::json toJson(const AsymptoticReport& report);

/// Full report.json document for one run.
nlohmann::json solveReport(const Trajectory& traj);

struct SvgOptions {
  double width = 800.0;
  double margin = 60.0;
  std::string annotation;
};

/// Closed cross-section curve drawn with equal aspect, frame, ticks and an
/// annotation line.
std::string renderSvg(const std::vector<Eigen::Vector2d>& curve, const SvgOptions& options);

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;  // zero-based, counter-clockwise seen from outside

  double area() const;
  double volume() const;  // signed, positive for outward orientation
  long eulerCharacteristic() const;
};

/// Surface of revolution of a half profile (axis to equator, heights
/// relative to the equator) reflected through the equator plane.
/// half.size() - 1 segments per half meridian; vertex count
/// segTheta * (2 (half.size() - 1) - 1) + 2.
Mesh revolveProfile(const std::vector<Eigen::Vector2d>& half, int segTheta);
void writeObj(std::ostream& os, const Mesh& mesh);

/// c0,lambda,p,w0p,classification,r_M,r0,wp_r0,r_inf,z_inf,roots_all_positive
void writePhaseCsv(std::ostream& os, const std::vector<PhaseRow>& rows);

// ---------------------------------------------------------------------------
// Configuration

namespace exit_code {
inline constexpr int Ok = 0;
inline constexpr int Error = 1;
inline constexpr int NotBiconcave = 2;
inline constexpr int Anomaly = 3;
inline constexpr int Usage = 64;
}  // namespace exit_code

/// Bad command line or config value; `flag` names the offending key.
class UsageError : public std::runtime_error {
 public:
  UsageError(std::string flag, const std::string& message);
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

/// Raw key/value pairs, keyed by flag name without the leading dashes.
using KeyValues = std::map<std::string, std::string>;

struct GridRange {
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  std::vector<double> values() const;
};

GridRange parseRange(const std::string& flag, const std::string& text);

struct RunConfig {
  std::optional<double> c0;
  std::optional<double> lambda;
  std::optional<double> p;
  std::optional<double> w0p;
  SolverConfig solver;
  std::string outDir = ".";
  std::set<std::string> formats;
  double sweepMin = 1e-4;
  double sweepMax = 1e-1;
  int sweepPoints = 16;
  std::optional<GridRange> c0Range;
  std::optional<GridRange> lambdaRange;
  std::optional<GridRange> pRange;
  std::optional<GridRange> w0pRange;
  int segmentsTheta = 128;
  int segmentsProfile = 256;
  int profileSamples = 512;
  std::optional<std::string> profilePath;

  /// Params, or UsageError naming the first missing flag.
  HelfrichParams params() const;
  double requireW0p() const;
};

enum class Command { Solve, Verify, Sweep, Plot, Mesh };

/// Keys accepted by a command, on the command line and in a config file.
const std::vector<std::string>& allowedKeys(Command command);

/// Config-file keys converted to their flag spelling; rejects unknown keys.
KeyValues configFileValues(const nlohmann::json& document, Command command);

/// defaults <- config file <- flags. `defaultOut` seeds --out (OUTPUT_DIR).
RunConfig resolveRunConfig(Command command, const KeyValues& fileValues, const KeyValues& flagValues,
                           const std::string& defaultOut = ".");

// ---------------------------------------------------------------------------
// Commands; args exclude the program and command names.

int cmdSolve(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmdVerify(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmdSweep(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmdPlot(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cmdMesh(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Dispatches argv[1] to a command.
int runCli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace helfrich
