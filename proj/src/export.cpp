#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <utility>

#include "helfrich/cli_export.hpp"

namespace helfrich {
namespace {

using nlohmann::json;

constexpr const char* kProfileHeader = "r,z,w,kappa_m,kappa_l,H,K";

json optionalJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fixed3(double v) {
  if (std::abs(v) < 5e-4) v = 0.0;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  return std::string(buf, res.ptr);
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double niceStep(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

std::string tickLabel(double v, double step) {
  if (std::abs(v) < 1e-9 * step) v = 0.0;
  const int decimals = std::max(0, int(-std::floor(std::log10(step) + 1e-9)));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

std::string xmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string formatDouble(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string formatShortest(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::optional<double> parseDouble(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  double value = 0.0;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  return value;
}

void writeProfileCsv(std::ostream& os, const std::vector<GeometrySample>& rows) {
  os << kProfileHeader << '\n';
  for (const auto& g : rows) {
    os << formatDouble(g.r) << ',' << formatDouble(g.z) << ',' << formatDouble(g.w) << ','
       << formatDouble(g.kappaMeridional) << ',' << formatDouble(g.kappaLongitudinal) << ',' << formatDouble(g.H)
       << ',' << formatDouble(g.K) << '\n';
  }
}

std::vector<GeometrySample> readProfileCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kProfileHeader)
    throw Error(ErrorCode::InvalidConfig, std::string("profile csv header must be ") + kProfileHeader);
  std::vector<GeometrySample> rows;
  int lineNo = 1;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty()) continue;
    const auto fields = splitCsv(line);
    if (fields.size() != 7)
      throw Error(ErrorCode::InvalidConfig, "profile csv line " + std::to_string(lineNo) + ": expected 7 fields");
    double v[7];
    for (int i = 0; i < 7; ++i) {
      const auto parsed = parseDouble(fields[std::size_t(i)]);
      if (!parsed)
        throw Error(ErrorCode::InvalidConfig, "profile csv line " + std::to_string(lineNo) + ": bad number '" +
                                                  fields[std::size_t(i)] + "'");
      v[i] = *parsed;
    }
    GeometrySample g;
    g.r = v[0];
    g.z = v[1];
    g.w = v[2];
    g.kappaMeridional = v[3];
    g.kappaLongitudinal = v[4];
    g.H = v[5];
    g.K = v[6];
    rows.push_back(g);
  }
  return rows;
}

std::vector<GeometrySample> profileRows(const Trajectory& traj, int n) {
  std::vector<GeometrySample> rows;
  if (traj.status == TrajectoryStatus::Equator) {
    for (const auto& pt : halfProfile(traj, n)) rows.push_back(pt.geometry);
    return rows;
  }
  if (traj.chartA.empty()) return rows;
  const double rEnd = traj.rEnd();
  for (int i = 0; i < n; ++i) {
    const double r = i == 0 ? 0.0 : std::max(traj.rBegin(), rEnd * double(i) / (n - 1));
    rows.push_back(geometryAt(traj, r));
  }
  return rows;
}

json toJson(const HelfrichParams& params) { return {{"c0", params.c0}, {"lambda", params.lambda}, {"p", params.p}}; }

json toJson(const SolverConfig& cfg) {
  return {{"relTol", cfg.relTol},
          {"absTol", cfg.absTol},
          {"epsStart", optionalJson(cfg.epsStart)},
          {"wSwitch", cfg.wSwitch},
          {"rMax", optionalJson(cfg.rMax)},
          {"maxSteps", cfg.maxSteps},
          {"eventTol", cfg.eventTol}};
}

json toJson(const DerivedConstants& c) {
  return {{"mu", c.mu}, {"deltaPlus", c.deltaPlus}, {"deltaMinus", c.deltaMinus}, {"xi", c.xi}, {"delta", c.delta}};
}

json toJson(const Landmarks& lm) {
  return {{"r_M", optionalJson(lm.rM)},
          {"w_max", optionalJson(lm.wMax)},
          {"r0", optionalJson(lm.r0)},
          {"wp_r0", optionalJson(lm.wpAtR0)},
          {"r_inf", optionalJson(lm.rInf)},
          {"z_inf", optionalJson(lm.zInf)},
          {"criticalPointsBeforeR0", lm.nCriticalPoints},
          {"extremaAfterR0", lm.extremaBeyondZero}};
}

json toJson(const Classification& cls) {
  return {{"verdict", std::string(toString(cls.verdict))},
          {"C1", cls.c1},
          {"C2", cls.c2},
          {"C3", cls.c3},
          {"evidence", cls.evidence}};
}

json toJson(const SurfaceTotals& t) {
  return {{"area", t.area}, {"volume", t.volume}, {"bendingEnergy", t.bendingEnergy}, {"helfrichEnergy", t.helfrichEnergy}};
}

json toJson(const BoundsReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"checkId", c.checkId},
                      {"status", std::string(toString(c.status))},
                      {"hypothesisSatisfied", c.hypothesisSatisfied},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"margin", c.margin},
                      {"tol", c.tol},
                      {"note", c.note}});
  }
  return {{"passed", report.passed()}, {"checks", checks}};
}

json toJson(const AsymptoticReport& rep) {
  json points = json::array();
  for (const auto& pt : rep.points) {
    points.push_back({{"w0p", pt.w0p},
                      {"rM2_over_w0p", pt.rMRatio},
                      {"r02_over_w0p", pt.r0Ratio},
                      {"wp_r0_over_w0p", pt.slopeRatio},
                      {"positiveArea_over_w0p2", pt.positiveArea},
                      {"negativeArea_over_w0p", pt.negativeArea},
                      {"inBand", pt.inBand},
                      {"rMOk", pt.rMOk},
                      {"r0Ok", pt.r0Ok},
                      {"slopeOk", pt.slopeOk},
                      {"areaChecked", pt.areaChecked},
                      {"areaOk", pt.areaOk},
                      {"orderedOk", pt.orderedOk}});
  }
  auto trend = [](const Trend& t) { return json{{"intercept", t.intercept}, {"slope", t.slope}}; };
  return {{"p", rep.p},
          {"bands",
           {{"cutoff", rep.bands.cutoff},
            {"lowerFactor", rep.bands.lowerFactor},
            {"upperFactor", rep.bands.upperFactor},
            {"slopeLow", rep.bands.slopeLow},
            {"slopeHigh", rep.bands.slopeHigh},
            {"areaFactor", rep.bands.areaFactor},
            {"areaPoints", rep.bands.areaPoints}}},
          {"limits",
           {{"rM2_over_w0p", rep.limitRM},
            {"r02_over_w0p", rep.limitR0},
            {"wp_r0_over_w0p_low", rep.limitSlopeLow},
            {"wp_r0_over_w0p_high", rep.limitSlopeHigh},
            {"positiveArea_over_w0p2", rep.limitArea}}},
          {"trends",
           {{"rM2_over_w0p", trend(rep.rMTrend)},
            {"r02_over_w0p", trend(rep.r0Trend)},
            {"wp_r0_over_w0p", trend(rep.slopeTrend)},
            {"positiveArea_over_w0p2", trend(rep.positiveAreaTrend)}}},
          {"points", points},
          {"excluded", rep.excluded},
          {"negativeAreaInfimum", rep.negativeAreaInfimum},
          {"passed", rep.passed}};
}

json solveReport(const Trajectory& traj) {
  const Landmarks lm = extractLandmarks(traj);
  const Classification cls = classify(traj, lm);
  const bool equator = traj.status == TrajectoryStatus::Equator;
  const DerivedConstants consts = derivedConstants(traj.params, traj.w0p);

  json doc;
  doc["params"] = toJson(traj.params);
  doc["params"]["w0p"] = traj.w0p;
  doc["config"] = toJson(traj.config);
  doc["derivedConstants"] = toJson(consts);
  doc["trajectory"] = {{"status", std::string(toString(traj.status))},
                       {"detail", traj.detail},
                       {"steps", traj.stepCount},
                       {"chartASteps", traj.chartA.size()},
                       {"chartBSteps", traj.chartB.size()}};
  doc["landmarks"] = toJson(lm);
  doc["classification"] = toJson(cls);
  doc["totals"] = equator ? toJson(surfaceTotals(traj)) : json(nullptr);
  doc["elResidual"] = elResidual(traj);
  doc["equatorIdentityResidual"] = equator ? json(equatorIdentityResidual(traj)) : json(nullptr);
  if (equator && traj.hasChartB()) {
    const EtaReport eta = etaBoundedness(traj);
    doc["eta"] = {{"sup", eta.supEta},
                  {"atEquatorExtrapolated", eta.etaAtEquatorExtrapolated},
                  {"timesSlopeExtrapolated", eta.etaTimesSlopeExtrapolated},
                  {"diverging", eta.diverging}};
  } else {
    doc["eta"] = nullptr;
  }
  doc["bounds"] = cls.verdict == Verdict::Biconcave ? toJson(checkSingle(traj, lm, traj.params, consts)) : json(nullptr);
  return doc;
}

std::string renderSvg(const std::vector<Eigen::Vector2d>& curve, const SvgOptions& opt) {
  double xMax = 0.0, yMax = 0.0;
  for (const auto& pt : curve) {
    xMax = std::max(xMax, std::abs(pt.x()));
    yMax = std::max(yMax, std::abs(pt.y()));
  }
  if (!(xMax > 0.0)) xMax = 1.0;
  const double X = 1.05 * xMax;
  const double Y = 1.05 * std::max(yMax, 1e-3 * xMax);
  const double scale = (opt.width - 2.0 * opt.margin) / (2.0 * X);
  const double plotH = 2.0 * Y * scale;
  const double height = 2.0 * opt.margin + plotH + 30.0;
  auto px = [&](double x) { return opt.margin + (x + X) * scale; };
  auto py = [&](double y) { return opt.margin + (Y - y) * scale; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed3(opt.width) << "\" height=\"" << fixed3(height)
     << "\" viewBox=\"0 0 " << fixed3(opt.width) << ' ' << fixed3(height) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << fixed3(opt.width) << "\" height=\"" << fixed3(height)
     << "\" fill=\"white\"/>\n";
  os << "<rect x=\"" << fixed3(px(-X)) << "\" y=\"" << fixed3(py(Y)) << "\" width=\"" << fixed3(2.0 * X * scale)
     << "\" height=\"" << fixed3(plotH) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  const double step = niceStep(2.0 * X, 8);
  os << "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"black\" stroke-width=\"1\">\n";
  for (double t = std::ceil(-X / step) * step; t <= X + 1e-12 * step; t += step) {
    const double x = px(t);
    os << "<line x1=\"" << fixed3(x) << "\" y1=\"" << fixed3(py(-Y)) << "\" x2=\"" << fixed3(x) << "\" y2=\""
       << fixed3(py(-Y) - 5.0) << "\"/>\n";
    os << "<text x=\"" << fixed3(x) << "\" y=\"" << fixed3(py(-Y) + 16.0)
       << "\" stroke=\"none\" text-anchor=\"middle\">" << tickLabel(t, step) << "</text>\n";
  }
  for (double t = std::ceil(-Y / step) * step; t <= Y + 1e-12 * step; t += step) {
    const double y = py(t);
    os << "<line x1=\"" << fixed3(px(-X)) << "\" y1=\"" << fixed3(y) << "\" x2=\"" << fixed3(px(-X) + 5.0)
       << "\" y2=\"" << fixed3(y) << "\"/>\n";
    os << "<text x=\"" << fixed3(px(-X) - 6.0) << "\" y=\"" << fixed3(y + 4.0)
       << "\" stroke=\"none\" text-anchor=\"end\">" << tickLabel(t, step) << "</text>\n";
  }
  os << "</g>\n";
  os << "<line x1=\"" << fixed3(px(0.0)) << "\" y1=\"" << fixed3(py(Y)) << "\" x2=\"" << fixed3(px(0.0))
     << "\" y2=\"" << fixed3(py(-Y)) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  os << "<line x1=\"" << fixed3(px(-X)) << "\" y1=\"" << fixed3(py(0.0)) << "\" x2=\"" << fixed3(px(X))
     << "\" y2=\"" << fixed3(py(0.0)) << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";

  os << "<path d=\"";
  for (std::size_t i = 0; i < curve.size(); ++i)
    os << (i == 0 ? "M" : " L") << fixed3(px(curve[i].x())) << ',' << fixed3(py(curve[i].y()));
  os << " Z\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\"/>\n";

  os << "<text x=\"" << fixed3(opt.margin) << "\" y=\"" << fixed3(height - 12.0)
     << "\" font-family=\"sans-serif\" font-size=\"13\">" << xmlEscape(opt.annotation) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

double Mesh::area() const {
  double a = 0.0;
  for (const auto& f : faces) {
    const Eigen::Vector3d& p0 = vertices[std::size_t(f[0])];
    a += 0.5 * (vertices[std::size_t(f[1])] - p0).cross(vertices[std::size_t(f[2])] - p0).norm();
  }
  return a;
}

double Mesh::volume() const {
  double v = 0.0;
  for (const auto& f : faces)
    v += vertices[std::size_t(f[0])].dot(vertices[std::size_t(f[1])].cross(vertices[std::size_t(f[2])]));
  return v / 6.0;
}

long Mesh::eulerCharacteristic() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& f : faces)
    for (int k = 0; k < 3; ++k) {
      const int a = f[std::size_t(k)], b = f[std::size_t((k + 1) % 3)];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  return long(vertices.size()) - long(edges.size()) + long(faces.size());
}

Mesh revolveProfile(const std::vector<Eigen::Vector2d>& half, int segTheta) {
  const int S = int(half.size()) - 1;
  if (S < 2 || segTheta < 3) throw Error(ErrorCode::InvalidConfig, "mesh needs >= 3 profile points and >= 3 segments");
  const int T = segTheta;
  const int rings = 2 * S - 1;

  Mesh mesh;
  mesh.vertices.reserve(std::size_t(T * rings + 2));
  mesh.vertices.emplace_back(0.0, 0.0, half[0].y());
  for (int m = 0; m < rings; ++m) {
    const int k = m < S ? m + 1 : 2 * S - 1 - m;
    const double r = half[std::size_t(k)].x();
    const double h = m < S ? half[std::size_t(k)].y() : -half[std::size_t(k)].y();
    for (int j = 0; j < T; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / T;
      mesh.vertices.emplace_back(r * std::cos(theta), r * std::sin(theta), h);
    }
  }
  mesh.vertices.emplace_back(0.0, 0.0, -half[0].y());

  auto ring = [T](int m, int j) { return 1 + m * T + (j % T); };
  const int bottom = 1 + rings * T;
  for (int j = 0; j < T; ++j) mesh.faces.push_back({0, ring(0, j), ring(0, j + 1)});
  for (int m = 0; m + 1 < rings; ++m)
    for (int j = 0; j < T; ++j) {
      mesh.faces.push_back({ring(m, j), ring(m + 1, j), ring(m + 1, j + 1)});
      mesh.faces.push_back({ring(m, j), ring(m + 1, j + 1), ring(m, j + 1)});
    }
  for (int j = 0; j < T; ++j) mesh.faces.push_back({bottom, ring(rings - 1, j + 1), ring(rings - 1, j)});
  return mesh;
}

void writeObj(std::ostream& os, const Mesh& mesh) {
  for (const auto& v : mesh.vertices)
    os << "v " << formatDouble(v.x()) << ' ' << formatDouble(v.y()) << ' ' << formatDouble(v.z()) << '\n';
  for (const auto& f : mesh.faces) os << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void writePhaseCsv(std::ostream& os, const std::vector<PhaseRow>& rows) {
  os << "c0,lambda,p,w0p,classification,r_M,r0,wp_r0,r_inf,z_inf,roots_all_positive\n";
  auto opt = [](const std::optional<double>& v) { return v ? formatShortest(*v) : std::string(); };
  for (const auto& row : rows) {
    const Landmarks& lm = row.landmarks;
    os << formatShortest(row.cell.params.c0) << ',' << formatShortest(row.cell.params.lambda) << ','
       << formatShortest(row.cell.params.p) << ',' << formatShortest(row.cell.w0p) << ',' << toString(row.verdict)
       << ',' << opt(lm.rM) << ',' << opt(lm.r0) << ',' << opt(lm.wpAtR0) << ',' << opt(lm.rInf) << ','
       << opt(lm.zInf) << ',' << (row.rootsAllPositive ? "true" : "false") << '\n';
  }
}

}  // namespace helfrich
