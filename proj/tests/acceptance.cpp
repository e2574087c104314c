// Acceptance criteria, one line per criterion. Exit status 0 iff all pass.
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "helfrich/cli_export.hpp"
#include "oracles.hpp"

using namespace helfrich;
namespace fs = std::filesystem;

namespace {

const HelfrichParams kReference{1.0, 0.25, 1.0};
const double kFigureSlopes[] = {0.2, 0.1, 0.05, 0.02};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("helfrich_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int invoke(int (*cmd)(const std::vector<std::string>&, std::ostream&, std::ostream&),
           const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cmd(args, out, err);
}

struct BiconcaveRun {
  HelfrichParams params;
  double w0p;
  Trajectory traj;
  Landmarks landmarks;
  BoundsReport bounds;
};

// Runs shared by several criteria.
std::vector<BiconcaveRun> gFigureRuns;
std::vector<BiconcaveRun> gRandomRuns;
AsymptoticReport gAsymptotic;
std::vector<PointRun> gAsymptoticRuns;

BiconcaveRun makeRun(const HelfrichParams& params, double w0p, const Trajectory& traj) {
  const Landmarks lm = extractLandmarks(traj);
  return {params, w0p, traj, lm, checkSingle(traj, lm, params, derivedConstants(params, w0p))};
}

bool isBiconcave(const Trajectory& traj) {
  return classify(traj, extractLandmarks(traj)).verdict == Verdict::Biconcave;
}

// Closed curve whose upper half has a strict interior maximum away from the
// axis, on both sides.
bool twoDimples(const std::vector<Eigen::Vector2d>& curve) {
  if (curve.size() < 8 || curve.front() != curve.back()) return false;
  double axisRight = 0, axisLeft = 0, rimRight = -1e300, rimLeft = -1e300;
  bool right = false, left = false;
  for (const auto& pt : curve) {
    if (pt.y() < 0) continue;
    if (pt.x() == 0.0) {
      axisRight = axisLeft = pt.y();
      right = left = true;
    }
    if (pt.x() > 0) rimRight = std::max(rimRight, pt.y());
    if (pt.x() < 0) rimLeft = std::max(rimLeft, pt.y());
  }
  return right && left && rimRight > axisRight && rimLeft > axisLeft;
}

Outcome criterion1() {
  Outcome o;
  const fs::path dir = scratch("figure");
  for (double w0p : kFigureSlopes) {
    const Trajectory traj = integrate(kReference, w0p);
    if (!isBiconcave(traj)) {
      o.pass = false;
      o.detail += " w0p=" + fmt(w0p) + " not Biconcave;";
      continue;
    }
    gFigureRuns.push_back(makeRun(kReference, w0p, traj));
    const std::vector<Eigen::Vector2d> curve = profile(traj, 512);
    const int code = invoke(cmdPlot, {"--c0", "1", "--lambda", "0.25", "--p", "1", "--w0p", formatShortest(w0p),
                                      "--out", dir.string()});
    const std::string svg = slurp(dir / "profile.svg");
    if (code != 0 || svg.find("<path") == std::string::npos || svg.find(" Z\"") == std::string::npos ||
        !twoDimples(curve)) {
      o.pass = false;
      o.detail += " w0p=" + fmt(w0p) + " plot not a closed two-dimpled curve;";
    }
  }
  if (o.pass) o.detail = "4/4 slopes Biconcave, closed two-dimpled SVG for each";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const std::vector<HelfrichParams> triples = oracle::randomPositiveRootTriples(20, 20240901);
  int biconcave = 0;
  int anomalies = 0;
  for (const HelfrichParams& params : triples) {
    const double w0p = 0.1 * analyzeCubic(params).smallestPositiveRoot();
    const Trajectory traj = integrate(params, w0p);
    if (isBiconcave(traj)) {
      ++biconcave;
      gRandomRuns.push_back(makeRun(params, w0p, traj));
      continue;
    }
    if (isBiconcave(integrate(params, w0p / 10))) continue;
    ++anomalies;
    o.detail += " ANOMALY c0=" + fmt(params.c0) + " lambda=" + fmt(params.lambda) + " p=" + fmt(params.p) + ";";
  }
  o.pass = biconcave >= 19 && anomalies == 0;
  o.detail = std::to_string(biconcave) + "/20 Biconcave at w0p = 0.1 t*, " + std::to_string(anomalies) +
             " anomalies" + o.detail;
  return o;
}

// Runs of criteria 1 and 2 plus the asymptotic sweep.
std::vector<const BoundsReport*> allBounds() {
  std::vector<const BoundsReport*> out;
  for (const auto& r : gFigureRuns) out.push_back(&r.bounds);
  for (const auto& r : gRandomRuns) out.push_back(&r.bounds);
  for (const auto& r : gAsymptoticRuns)
    if (r.bounds) out.push_back(&*r.bounds);
  return out;
}

Outcome checkIds(const std::vector<const BoundsReport*>& reports, const std::vector<std::string>& ids) {
  Outcome o;
  int evaluated = 0;
  double worst = 1e300;
  for (const BoundsReport* rep : reports) {
    for (const auto& id : ids) {
      const CheckRecord* c = rep->find(id);
      if (!c || c->status != CheckStatus::Pass) {
        o.pass = false;
        o.detail += " " + id + (c ? " " + std::string(toString(c->status)) + " (" + c->note + ")" : " missing") + ";";
        continue;
      }
      ++evaluated;
      const double scale = std::max(std::abs(c->lhs), std::abs(c->rhs));
      worst = std::min(worst, scale > 0 ? c->margin / scale : c->margin);
    }
  }
  o.detail = std::to_string(evaluated) + " checks pass on " + std::to_string(reports.size()) +
             " runs, smallest relative margin " + fmt(worst) + o.detail;
  return o;
}

Outcome criterion3() {
  std::vector<const BoundsReport*> reports;
  for (const auto& r : gFigureRuns) reports.push_back(&r.bounds);
  for (const auto& r : gRandomRuns) reports.push_back(&r.bounds);
  return checkIds(reports, {"R0Upper", "WpR0Upper"});
}

Outcome criterion4() {
  Outcome o;
  gAsymptoticRuns = runPoints(kReference, geometricGrid(1e-1, 1e-4, 16), SolverConfig{});
  gAsymptotic = summarizeAsymptotics(kReference, gAsymptoticRuns);
  o.pass = gAsymptotic.passed && gAsymptotic.excluded.empty();
  const AsymptoticPoint& last = gAsymptotic.points.back();
  o.detail = "16 slopes, at w0p = " + fmt(last.w0p) + ": rM^2/w0p = " + fmt(last.rMRatio) + " (" +
             fmt(gAsymptotic.limitRM) + "), r0^2/w0p = " + fmt(last.r0Ratio) + " (" + fmt(gAsymptotic.limitR0) +
             "), w'(r0)/w0p = " + fmt(last.slopeRatio) + ", area = " + fmt(last.positiveArea) + " (" +
             fmt(gAsymptotic.limitArea) + ")";
  for (const auto& pt : gAsymptotic.points)
    if (!(pt.rMOk && pt.r0Ok && pt.slopeOk && pt.areaOk && pt.orderedOk)) o.detail += "; band miss at " + fmt(pt.w0p);
  return o;
}

Outcome criterion5() { return checkIds(allBounds(), {"RInfUpper", "NegAreaLower"}); }

Outcome criterion6() {
  Outcome o;
  int n = 0;
  double worst = -1e300;
  for (const auto& r : gAsymptoticRuns) {
    if (r.w0p > 1e-2) continue;
    ++n;
    if (r.classification.verdict != Verdict::Biconcave || !r.landmarks.zInf || !(*r.landmarks.zInf < 0)) {
      o.pass = false;
      o.detail += " w0p=" + fmt(r.w0p) + " failed;";
      continue;
    }
    worst = std::max(worst, *r.landmarks.zInf);
  }
  o.pass = o.pass && n > 0;
  o.detail = std::to_string(n) + " runs with w0p <= 1e-2, largest z_inf = " + fmt(worst) + o.detail;
  return o;
}

Outcome criterion7() {
  Outcome o;
  double worst = 0;
  for (double w0p : kFigureSlopes) {
    double prev = 1e300;
    for (double tol : {1e-10, 1e-11, 1e-12}) {
      SolverConfig cfg;
      cfg.relTol = tol;
      cfg.absTol = tol * 1e-2;
      const double res = equatorIdentityResidual(integrate(kReference, w0p, cfg));
      if (tol == 1e-10) {
        worst = std::max(worst, res);
        if (res > 1e-4) o.pass = false;
      }
      if (!(res <= prev)) {
        o.pass = false;
        o.detail += " w0p=" + fmt(w0p) + " not monotone at relTol " + fmt(tol) + ";";
      }
      prev = res;
    }
  }
  o.detail = "largest residual at relTol 1e-10: " + fmt(worst) + ", non-increasing to 1e-12" + o.detail;
  return o;
}

Outcome criterion8() {
  Outcome o;
  SolverConfig tight;
  tight.relTol = 1e-12;
  tight.absTol = 1e-14;
  double overlap = 0, residual = 0, slope = 1e300;
  for (double w0p : kFigureSlopes) {
    const oracle::Overlap ov = oracle::chartOverlap(kReference, w0p, tight);
    overlap = std::max({overlap, ov.relR, ov.relZ});
    residual = std::max(residual, elResidual(integrate(kReference, w0p)));
    slope = std::min(slope, oracle::seriesResidualSlope(kReference, w0p, true));
  }
  const double kappa = oracle::kappaFormMaxError(1000, 99);
  o.pass = overlap <= 1e-8 && residual <= 1e-6 && slope >= 2.5 && kappa <= 1e-9;
  o.detail = "chart overlap " + fmt(overlap) + ", EL residual " + fmt(residual) + ", series slope " + fmt(slope) +
             ", kappa form " + fmt(kappa);
  return o;
}

Outcome criterion9() {
  Outcome o;
  double constants = 0, totals = 0;
  oracle::Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    const HelfrichParams params{rng.uniform(-2, 2), rng.uniform(-1, 2), rng.uniform(0.1, 3)};
    const double w0p = rng.uniform(0.01, 1);
    const DerivedConstants c = derivedConstants(params, w0p);
    const oracle::SampledConstants s = oracle::sampleConstants(params, w0p);
    constants = std::max({constants, std::abs(c.mu - s.mu), std::abs(c.deltaPlus - s.deltaPlus),
                          std::abs(c.deltaMinus - s.deltaMinus)});
  }
  for (const auto& r : gFigureRuns) {
    const SurfaceTotals t = surfaceTotals(r.traj);
    const oracle::Totals q = oracle::requadrature(r.traj);
    totals = std::max({totals, std::abs(t.area - q.area) / q.area, std::abs(t.volume - q.volume) / q.volume,
                       std::abs(t.bendingEnergy - q.energy) / std::abs(q.energy)});
  }
  const SurfaceTotals sphere = oracle::sphereTotals(1.0, SolverConfig{});
  const double pi = std::numbers::pi;
  const double sphereErr =
      std::max(std::abs(sphere.area - 4 * pi) / (4 * pi), std::abs(sphere.volume - 4 * pi / 3) / (4 * pi / 3));
  o.pass = constants <= 1e-6 && totals <= 1e-7 && sphereErr <= 1e-6;
  o.detail = "constants vs sampling " + fmt(constants) + ", totals vs re-quadrature " + fmt(totals) + ", sphere " +
             fmt(sphereErr);
  return o;
}

Outcome criterion10() {
  Outcome o;
  const fs::path a = scratch("repeat_a"), b = scratch("repeat_b");
  auto solveArgs = [](const fs::path& dir) {
    return std::vector<std::string>{"--c0",  "1",   "--lambda", "0.25", "--p",          "1",
                                    "--w0p", "0.05", "--format", "csv,json,svg,obj", "--out", dir.string()};
  };
  auto verifyArgs = [](const fs::path& dir) {
    return std::vector<std::string>{"--c0", "1", "--lambda", "0.25", "--p", "1", "--out", dir.string()};
  };
  const int s1 = invoke(cmdSolve, solveArgs(a)), s2 = invoke(cmdSolve, solveArgs(b));
  const int v1 = invoke(cmdVerify, verifyArgs(a)), v2 = invoke(cmdVerify, verifyArgs(b));
  int identical = 0, files = 0;
  for (const char* name : {"profile.csv", "report.json", "profile.svg", "mesh.obj", "bounds_report.json"}) {
    ++files;
    const std::string x = slurp(a / name), y = slurp(b / name);
    if (!x.empty() && x == y) ++identical;
    else o.detail += std::string(" ") + name + " differs;";
  }
  o.pass = s1 == 0 && s2 == 0 && v1 == 0 && v2 == 0 && identical == files;
  o.detail = std::to_string(identical) + "/" + std::to_string(files) + " outputs byte-identical, exit codes " +
             std::to_string(s1) + std::to_string(s2) + std::to_string(v1) + std::to_string(v2) + o.detail;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"biconcave figure profiles", criterion1},
      {"random positive-root parameters", criterion2},
      {"zero radius and slope at r0", criterion3},
      {"small-slope asymptotics", criterion4},
      {"equator radius and negative lobe", criterion5},
      {"negative equator height", criterion6},
      {"equator curvature identity", criterion7},
      {"numerical consistency", criterion8},
      {"oracle agreement", criterion9},
      {"reproducibility", criterion10},
  };
  // criterion 5 reuses the sweep of criterion 4
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("helfrich_acceptance_" + std::to_string(::getpid())));
  std::cout << (all ? "all criteria pass" : "some criteria fail") << std::endl;
  return all ? 0 : 1;
}
