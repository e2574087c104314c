#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "helfrich/cli_export.hpp"

namespace helfrich {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kParamKeys = {"c0", "lambda", "p", "w0p"};
const std::vector<std::string> kSolverKeys = {"rel-tol", "abs-tol", "eps-start", "w-switch", "r-max"};
const std::set<std::string> kFormats = {"csv", "json", "svg", "obj"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

double toNumber(const std::string& key, const std::string& text) {
  const auto v = parseDouble(text);
  if (!v || !std::isfinite(*v)) throw UsageError(key, "expected a finite number, got '" + text + "'");
  return *v;
}

int toInt(const std::string& key, const std::string& text) {
  int value = 0;
  const char* last = text.data() + text.size();
  auto res = std::from_chars(text.data(), last, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != last)
    throw UsageError(key, "expected an integer, got '" + text + "'");
  return value;
}

double positive(const std::string& key, const std::string& text) {
  const double v = toNumber(key, text);
  if (!(v > 0.0)) throw UsageError(key, "must be positive, got '" + text + "'");
  return v;
}

std::set<std::string> parseFormats(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!kFormats.count(item)) throw UsageError("format", "unknown format '" + item + "' (csv, json, svg, obj)");
    out.insert(item);
  }
  if (out.empty()) throw UsageError("format", "no format given");
  return out;
}

const std::map<std::string, std::string> kDescriptions = {
    {"c0", "spontaneous curvature"},
    {"lambda", "tensile stress"},
    {"p", "osmotic pressure difference"},
    {"w0p", "initial slope w'(0) > 0"},
    {"rel-tol", "relative tolerance (default 1e-10)"},
    {"abs-tol", "absolute tolerance (default 1e-12)"},
    {"eps-start", "series start radius"},
    {"w-switch", "|w| at the chart switch (default 10)"},
    {"r-max", "abort radius"},
    {"out", "output directory (default $OUTPUT_DIR or .)"},
    {"format", "comma list of csv,json,svg,obj (default csv,json)"},
    {"sweep-min", "smallest w0p (default 1e-4)"},
    {"sweep-max", "largest w0p (default 1e-1)"},
    {"sweep-points", "geometric grid size (default 16)"},
    {"c0-range", "start:stop:count"},
    {"lambda-range", "start:stop:count"},
    {"p-range", "start:stop:count"},
    {"w0p-range", "start:stop:count"},
    {"profile", "profile.csv to draw instead of integrating"},
    {"segments-theta", "azimuthal segments (default 128)"},
    {"segments-profile", "segments per half meridian (default 256)"},
};

struct Parsed {
  KeyValues flags;
  std::optional<std::string> configPath;
  bool help = false;
};

Parsed parseArgs(Command command, const std::string& name, const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"helfrich " + name, "helfrich " + name};
  std::map<std::string, std::string> storage;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : allowedKeys(command)) options[key] = app.add_option("--" + key, storage[key], kDescriptions.at(key));
  std::string configPath;
  CLI::Option* configOpt = app.add_option("--config", configPath, "JSON file keyed by flag names");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  Parsed parsed;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    parsed.help = true;
    return parsed;
  } catch (const CLI::ParseError& e) {
    throw UsageError("", e.what());
  }
  for (const auto& [key, opt] : options)
    if (opt->count() > 0) parsed.flags[key] = storage[key];
  if (configOpt->count() > 0) parsed.configPath = configPath;
  return parsed;
}

RunConfig loadConfig(Command command, const Parsed& parsed) {
  KeyValues fileValues;
  if (parsed.configPath) {
    std::ifstream in(*parsed.configPath);
    if (!in) throw UsageError("config", "cannot open '" + *parsed.configPath + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config", std::string("invalid JSON: ") + e.what());
    }
    fileValues = configFileValues(doc, command);
  }
  const char* env = std::getenv("OUTPUT_DIR");
  return resolveRunConfig(command, fileValues, parsed.flags, env && *env ? env : ".");
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_code::Usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::Error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::Error;
  }
}

fs::path prepareOut(const RunConfig& rc) {
  fs::path dir(rc.outDir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("out", "cannot create '" + rc.outDir + "': " + ec.message());
  return dir;
}

void writeFile(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
  os << content;
}

std::string annotation(const HelfrichParams& p, double w0p) {
  return "c0 = " + formatShortest(p.c0) + ", lambda = " + formatShortest(p.lambda) + ", p = " + formatShortest(p.p) +
         ", w0p = " + formatShortest(w0p);
}

std::string svgFor(const Trajectory& traj, int samples) {
  SvgOptions opt;
  opt.annotation = annotation(traj.params, traj.w0p);
  return renderSvg(profile(traj, samples), opt);
}

std::string objFor(const Trajectory& traj, int segTheta, int segProfile) {
  std::vector<Eigen::Vector2d> half;
  for (const auto& pt : halfProfile(traj, segProfile + 1)) half.emplace_back(pt.r, pt.height);
  std::ostringstream os;
  writeObj(os, revolveProfile(half, segTheta));
  return os.str();
}

}  // namespace

UsageError::UsageError(std::string flag, const std::string& message)
    : std::runtime_error(flag.empty() ? message : "--" + flag + ": " + message), flag_(std::move(flag)) {}

std::vector<double> GridRange::values() const {
  if (count == 1) return {start};
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[std::size_t(i)] = start + (stop - start) * double(i) / (count - 1);
  out.back() = stop;
  return out;
}

GridRange parseRange(const std::string& flag, const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw UsageError(flag, "expected start:stop:count, got '" + text + "'");
  GridRange r{toNumber(flag, parts[0]), toNumber(flag, parts[1]), toInt(flag, parts[2])};
  if (r.count < 1) throw UsageError(flag, "count must be at least 1");
  return r;
}

HelfrichParams RunConfig::params() const {
  if (!c0) throw UsageError("c0", "required");
  if (!lambda) throw UsageError("lambda", "required");
  if (!p) throw UsageError("p", "required");
  return {*c0, *lambda, *p};
}

double RunConfig::requireW0p() const {
  if (!w0p) throw UsageError("w0p", "required");
  return *w0p;
}

const std::vector<std::string>& allowedKeys(Command command) {
  static const std::vector<std::string> solve = concat({kParamKeys, kSolverKeys, {"out", "format"}});
  static const std::vector<std::string> verify =
      concat({{"c0", "lambda", "p"}, kSolverKeys, {"out", "sweep-min", "sweep-max", "sweep-points"}});
  static const std::vector<std::string> sweep =
      concat({{"c0-range", "lambda-range", "p-range", "w0p-range"}, kSolverKeys, {"out"}});
  static const std::vector<std::string> plot = concat({kParamKeys, kSolverKeys, {"out", "profile"}});
  static const std::vector<std::string> mesh =
      concat({kParamKeys, kSolverKeys, {"out", "segments-theta", "segments-profile"}});
  switch (command) {
    case Command::Solve: return solve;
    case Command::Verify: return verify;
    case Command::Sweep: return sweep;
    case Command::Plot: return plot;
    case Command::Mesh: return mesh;
  }
  return solve;
}

KeyValues configFileValues(const json& document, Command command) {
  if (!document.is_object()) throw UsageError("config", "top level must be a JSON object");
  const auto& keys = allowedKeys(command);
  KeyValues values;
  for (const auto& [key, value] : document.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError(key, "unknown config key");
    if (value.is_number_integer()) {
      values[key] = std::to_string(value.get<long long>());
    } else if (value.is_number()) {
      values[key] = formatDouble(value.get<double>());
    } else if (value.is_string()) {
      values[key] = value.get<std::string>();
    } else if (value.is_array() && key == "format") {
      std::string joined;
      for (const auto& item : value) {
        if (!item.is_string()) throw UsageError(key, "format entries must be strings");
        joined += (joined.empty() ? "" : ",") + item.get<std::string>();
      }
      values[key] = joined;
    } else {
      throw UsageError(key, "unsupported value type in config file");
    }
  }
  return values;
}

RunConfig resolveRunConfig(Command command, const KeyValues& fileValues, const KeyValues& flagValues,
                           const std::string& defaultOut) {
  const auto& keys = allowedKeys(command);
  KeyValues merged = fileValues;
  for (const auto& [k, v] : flagValues) merged[k] = v;

  RunConfig rc;
  rc.outDir = defaultOut;
  rc.formats = {"csv", "json"};
  for (const auto& [key, text] : merged) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError(key, "not accepted by this command");
    if (key == "c0") rc.c0 = toNumber(key, text);
    else if (key == "lambda") rc.lambda = toNumber(key, text);
    else if (key == "p") rc.p = toNumber(key, text);
    else if (key == "w0p") rc.w0p = positive(key, text);
    else if (key == "rel-tol") {
      rc.solver.relTol = positive(key, text);
      if (!(rc.solver.relTol < 1.0)) throw UsageError(key, "must lie in (0, 1)");
    } else if (key == "abs-tol") rc.solver.absTol = positive(key, text);
    else if (key == "eps-start") rc.solver.epsStart = positive(key, text);
    else if (key == "w-switch") {
      rc.solver.wSwitch = toNumber(key, text);
      if (!(rc.solver.wSwitch > 1.0)) throw UsageError(key, "must exceed 1");
    } else if (key == "r-max") rc.solver.rMax = positive(key, text);
    else if (key == "out") {
      if (text.empty()) throw UsageError(key, "empty path");
      rc.outDir = text;
    } else if (key == "format") rc.formats = parseFormats(text);
    else if (key == "sweep-min") rc.sweepMin = positive(key, text);
    else if (key == "sweep-max") rc.sweepMax = positive(key, text);
    else if (key == "sweep-points") {
      rc.sweepPoints = toInt(key, text);
      if (rc.sweepPoints < 1) throw UsageError(key, "must be at least 1");
    } else if (key == "c0-range") rc.c0Range = parseRange(key, text);
    else if (key == "lambda-range") rc.lambdaRange = parseRange(key, text);
    else if (key == "p-range") rc.pRange = parseRange(key, text);
    else if (key == "w0p-range") {
      rc.w0pRange = parseRange(key, text);
      if (!(rc.w0pRange->start > 0.0 && rc.w0pRange->stop > 0.0)) throw UsageError(key, "values must be positive");
    } else if (key == "segments-theta") {
      rc.segmentsTheta = toInt(key, text);
      if (rc.segmentsTheta < 3) throw UsageError(key, "must be at least 3");
    } else if (key == "segments-profile") {
      rc.segmentsProfile = toInt(key, text);
      if (rc.segmentsProfile < 3) throw UsageError(key, "must be at least 3");
    } else if (key == "profile") rc.profilePath = text;
  }
  if (rc.sweepMax < rc.sweepMin) throw UsageError("sweep-max", "must not be below --sweep-min");
  return rc;
}

int cmdSolve(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Parsed parsed = parseArgs(Command::Solve, "solve", args, out);
    if (parsed.help) return exit_code::Ok;
    const RunConfig rc = loadConfig(Command::Solve, parsed);
    const HelfrichParams params = rc.params();
    const double w0p = rc.requireW0p();
    const fs::path dir = prepareOut(rc);

    const Trajectory traj = integrate(params, w0p, rc.solver);
    const Classification cls = classify(traj, extractLandmarks(traj));
    const bool biconcave = cls.verdict == Verdict::Biconcave;

    if (rc.formats.count("csv")) {
      std::ostringstream os;
      writeProfileCsv(os, profileRows(traj, rc.profileSamples));
      writeFile(dir / "profile.csv", os.str());
    }
    if (rc.formats.count("json")) writeFile(dir / "report.json", solveReport(traj).dump(2) + "\n");
    if (rc.formats.count("svg")) {
      if (biconcave) writeFile(dir / "profile.svg", svgFor(traj, rc.profileSamples));
      else err << "skipping svg: classification is " << toString(cls.verdict) << '\n';
    }
    if (rc.formats.count("obj")) {
      if (biconcave) writeFile(dir / "mesh.obj", objFor(traj, rc.segmentsTheta, rc.segmentsProfile));
      else err << "skipping obj: classification is " << toString(cls.verdict) << '\n';
    }
    out << "classification: " << toString(cls.verdict) << " (" << cls.evidence << ")\n";
    return biconcave ? exit_code::Ok : exit_code::NotBiconcave;
  });
}

int cmdVerify(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Parsed parsed = parseArgs(Command::Verify, "verify", args, out);
    if (parsed.help) return exit_code::Ok;
    const RunConfig rc = loadConfig(Command::Verify, parsed);
    const HelfrichParams params = rc.params();
    const fs::path dir = prepareOut(rc);

    const std::vector<double> grid = geometricGrid(rc.sweepMax, rc.sweepMin, rc.sweepPoints);
    const std::vector<PointRun> runs = runPoints(params, grid, rc.solver);
    const AsymptoticReport asym = summarizeAsymptotics(params, runs);

    bool checksPassed = true;
    json points = json::array();
    for (const auto& run : runs) {
      json pt = {{"w0p", run.w0p},
                 {"classification", std::string(toString(run.classification.verdict))},
                 {"evidence", run.classification.evidence},
                 {"landmarks", toJson(run.landmarks)},
                 {"bounds", run.bounds ? toJson(*run.bounds) : json(nullptr)}};
      if (!run.error.empty()) pt["error"] = run.error;
      points.push_back(pt);
      if (!run.bounds) continue;
      for (const auto& c : run.bounds->checks) {
        if (c.status != CheckStatus::Fail) continue;
        checksPassed = false;
        err << "FAIL " << c.checkId << " at w0p = " << formatShortest(run.w0p) << " (margin " << formatShortest(c.margin)
            << ", tol " << formatShortest(c.tol) << ")\n";
      }
    }
    if (!asym.passed && !asym.points.empty()) err << "FAIL asymptotic bands\n";

    json doc = {{"params", toJson(params)},
                {"config", toJson(rc.solver)},
                {"sweep", {{"min", rc.sweepMin}, {"max", rc.sweepMax}, {"points", rc.sweepPoints}}},
                {"points", points},
                {"excluded", asym.excluded},
                {"asymptotic", toJson(asym)},
                {"passed", checksPassed && asym.passed}};
    writeFile(dir / "bounds_report.json", doc.dump(2) + "\n");

    out << asym.points.size() << " Biconcave points, " << asym.excluded.size() << " excluded; "
        << (checksPassed && asym.passed ? "all checks pass" : "checks failed") << '\n';
    if (asym.points.empty()) return exit_code::NotBiconcave;
    return checksPassed && asym.passed ? exit_code::Ok : exit_code::Error;
  });
}

int cmdSweep(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Parsed parsed = parseArgs(Command::Sweep, "sweep", args, out);
    if (parsed.help) return exit_code::Ok;
    const RunConfig rc = loadConfig(Command::Sweep, parsed);
    if (!rc.c0Range) throw UsageError("c0-range", "required");
    if (!rc.lambdaRange) throw UsageError("lambda-range", "required");
    if (!rc.pRange) throw UsageError("p-range", "required");
    if (!rc.w0pRange) throw UsageError("w0p-range", "required");
    const fs::path dir = prepareOut(rc);

    std::vector<PhaseCell> cells;
    for (double c0 : rc.c0Range->values())
      for (double lambda : rc.lambdaRange->values())
        for (double p : rc.pRange->values())
          for (double w0p : rc.w0pRange->values()) cells.push_back({{c0, lambda, p}, w0p});
    const std::vector<PhaseRow> rows = phaseSweep(cells, rc.solver);

    std::ostringstream os;
    writePhaseCsv(os, rows);
    writeFile(dir / "phase.csv", os.str());

    int anomalies = 0;
    for (const auto& row : rows) {
      if (!row.anomaly) continue;
      ++anomalies;
      err << "ANOMALY c0 = " << formatShortest(row.cell.params.c0) << ", lambda = " << formatShortest(row.cell.params.lambda)
          << ", p = " << formatShortest(row.cell.params.p) << ", w0p = " << formatShortest(row.cell.w0p) << ": "
          << toString(row.verdict) << '\n';
    }
    out << rows.size() << " cells, " << anomalies << " anomalies\n";
    return anomalies > 0 ? exit_code::Anomaly : exit_code::Ok;
  });
}

int cmdPlot(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Parsed parsed = parseArgs(Command::Plot, "plot", args, out);
    if (parsed.help) return exit_code::Ok;
    const RunConfig rc = loadConfig(Command::Plot, parsed);

    std::string svg;
    if (rc.profilePath) {
      std::ifstream in(*rc.profilePath);
      if (!in) throw UsageError("profile", "cannot open '" + *rc.profilePath + "'");
      const std::vector<GeometrySample> rows = readProfileCsv(in);
      if (rows.size() < 3 || rows.back().w != -std::numeric_limits<double>::infinity()) {
        err << "error: " << toString(ErrorCode::NotBiconcave) << ": profile does not reach the equator\n";
        return exit_code::NotBiconcave;
      }
      std::vector<Eigen::Vector2d> half;
      const double zInf = rows.back().z;
      for (const auto& g : rows) half.emplace_back(g.r, g.z - zInf);
      SvgOptions opt;
      opt.annotation = rc.c0 && rc.lambda && rc.p && rc.w0p ? annotation(rc.params(), *rc.w0p)
                                                             : "profile " + fs::path(*rc.profilePath).filename().string();
      svg = renderSvg(mirrorHalfProfile(half), opt);
    } else {
      const Trajectory traj = integrate(rc.params(), rc.requireW0p(), rc.solver);
      const Classification cls = classify(traj, extractLandmarks(traj));
      if (cls.verdict != Verdict::Biconcave) {
        err << "error: " << toString(ErrorCode::NotBiconcave) << ": classification is " << toString(cls.verdict) << '\n';
        return exit_code::NotBiconcave;
      }
      svg = svgFor(traj, rc.profileSamples);
    }
    const fs::path dir = prepareOut(rc);
    writeFile(dir / "profile.svg", svg);
    out << "wrote " << (dir / "profile.svg").string() << '\n';
    return exit_code::Ok;
  });
}

int cmdMesh(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Parsed parsed = parseArgs(Command::Mesh, "mesh", args, out);
    if (parsed.help) return exit_code::Ok;
    const RunConfig rc = loadConfig(Command::Mesh, parsed);
    const Trajectory traj = integrate(rc.params(), rc.requireW0p(), rc.solver);
    const Classification cls = classify(traj, extractLandmarks(traj));
    if (cls.verdict != Verdict::Biconcave) {
      err << "error: " << toString(ErrorCode::NotBiconcave) << ": classification is " << toString(cls.verdict) << '\n';
      return exit_code::NotBiconcave;
    }
    const fs::path dir = prepareOut(rc);
    writeFile(dir / "mesh.obj", objFor(traj, rc.segmentsTheta, rc.segmentsProfile));
    out << "wrote " << (dir / "mesh.obj").string() << '\n';
    return exit_code::Ok;
  });
}

int runCli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  static const char* usage =
      "usage: helfrich <command> [flags]\n"
      "commands:\n"
      "  solve   integrate one initial slope; profile.csv, report.json\n"
      "  verify  bound checks over a slope sweep; bounds_report.json\n"
      "  sweep   classification over a parameter grid; phase.csv\n"
      "  plot    cross-section SVG from a profile.csv or solve flags\n"
      "  mesh    OBJ surface of revolution\n"
      "run 'helfrich <command> --help' for flags\n";
  if (argv.size() < 2) {
    err << usage;
    return exit_code::Usage;
  }
  const std::string& name = argv[1];
  const std::vector<std::string> rest(argv.begin() + 2, argv.end());
  if (name == "--help" || name == "-h" || name == "help") {
    out << usage;
    return exit_code::Ok;
  }
  if (name == "solve") return cmdSolve(rest, out, err);
  if (name == "verify") return cmdVerify(rest, out, err);
  if (name == "sweep") return cmdSweep(rest, out, err);
  if (name == "plot") return cmdPlot(rest, out, err);
  if (name == "mesh") return cmdMesh(rest, out, err);
  err << "usage error: unknown command '" << name << "'\n" << usage;
  return exit_code::Usage;
}

}  // namespace helfrich
