#include "helfrich/bounds_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace helfrich {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRelTol = 1e-8;
constexpr int kPointwiseSamples = 4000;

double maxROn(const HelfrichParams& params, double hi) {
  double best = std::max(evalR(0.0, params), evalR(hi, params));
  if (params.a2() != 0.0) {
    const double vertex = -params.a1() / (2.0 * params.a2());
    if (vertex > 0.0 && vertex < hi) best = std::max(best, evalR(vertex, params));
  }
  return best;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double scaledTol(double lhs, double rhs) { return kRelTol * std::max({std::abs(lhs), std::abs(rhs), 1e-300}); }

CheckRecord evaluate(std::string id, bool hypothesis, double lhs, double rhs, double margin, double tol,
                     bool informational = false, bool strict = false) {
  CheckRecord rec{std::move(id), hypothesis, lhs, rhs, margin, tol, CheckStatus::Skipped, {}};
  if (informational) {
    rec.status = CheckStatus::Info;
  } else if (!hypothesis) {
    rec.status = CheckStatus::Skipped;
  } else {
    const bool ok = strict ? margin > 0.0 : margin >= -tol;
    rec.status = ok && std::isfinite(margin) ? CheckStatus::Pass : CheckStatus::Fail;
  }
  return rec;
}

// lhs <= rhs
CheckRecord upper(std::string id, bool hypothesis, double lhs, double rhs, bool informational = false) {
  return evaluate(std::move(id), hypothesis, lhs, rhs, rhs - lhs, scaledTol(lhs, rhs), informational);
}

// lhs >= rhs
CheckRecord lower(std::string id, bool hypothesis, double lhs, double rhs, bool informational = false) {
  return evaluate(std::move(id), hypothesis, lhs, rhs, lhs - rhs, scaledTol(lhs, rhs), informational);
}

// Worst sample of a pointwise upper bound lhs(r) <= rhs(r), ranked by margin
// relative to the local scale.
struct PointwiseWorst {
  double r = kNaN, lhs = kNaN, rhs = kNaN, margin = std::numeric_limits<double>::infinity(), tol = 0.0;
  double score = std::numeric_limits<double>::infinity();

  void add(double rr, double l, double h) {
    const double m = h - l;
    const double t = scaledTol(l, h);
    const double s = m / (t / kRelTol);
    if (s < score || !std::isfinite(m)) {
      score = std::isfinite(m) ? s : -std::numeric_limits<double>::infinity();
      r = rr;
      lhs = l;
      rhs = h;
      margin = m;
      tol = t;
    }
  }
};

CheckRecord pointwise(std::string id, bool hypothesis, const PointwiseWorst& worst, bool informational = false) {
  CheckRecord rec = evaluate(std::move(id), hypothesis, worst.lhs, worst.rhs, worst.margin, worst.tol, informational);
  rec.note = "worst at r = " + num(worst.r);
  return rec;
}

// kappa = w / (r sqrt(1+w^2)) integrated in its own form from the axis
// series kappa = w0p + R(w0p) r^2/16. Computing kappa' from (w, w') cancels
// two O(w/r^2) terms, which is too coarse for the near-axis bound.
class KappaForm {
 public:
  using Vec = Eigen::Matrix<double, 2, 1>;

  KappaForm(const HelfrichParams& params, double w0p, double rStart, double rEnd, const SolverConfig& cfg) {
    auto f = [&params](double r, const Vec& y) {
      Vec dy;
      dy << y(1), rhsKappa(r, y(0), y(1), params);
      return dy;
    };
    const double rr = evalR(w0p, params);
    Vec y;
    y << w0p + rr * rStart * rStart / 16.0, rr * rStart / 8.0;
    DormandPrince<2> dp(cfg.relTol, cfg.absTol * 1e-6);
    double r = rStart, h = 0.5 * rStart, prevErr = 1e-4;
    Vec k1 = f(r, y);
    while (r < rEnd) {
      if (steps_.size() >= std::size_t(cfg.maxSteps)) throw Error(ErrorCode::StepUnderflow, "kappa form: maxSteps");
      if (std::abs(h) < 1e-14 * (1.0 + r)) throw Error(ErrorCode::StepUnderflow, "kappa form step underflow");
      const bool last = r + h >= rEnd;
      const double hTry = last ? rEnd - r : h;
      const TrialStep<2> trial = dp.step(f, r, y, k1, hTry);
      if (!(trial.errorNorm <= 1.0)) {
        h = dp.proposeStep(hTry, trial.errorNorm, prevErr, false);
        continue;
      }
      steps_.push_back(trial.dense);
      r = last ? rEnd : trial.dense.tEnd;
      y = trial.y;
      k1 = trial.dydt;
      h = dp.proposeStep(hTry, trial.errorNorm, prevErr, true);
    }
  }

  // Samples must be requested in increasing r.
  Vec at(double r) {
    while (cursor_ + 1 < steps_.size() && steps_[cursor_].tEnd < r) ++cursor_;
    return steps_[cursor_].value(r);
  }

 private:
  std::vector<DenseStep<2>> steps_;
  std::size_t cursor_ = 0;
};

Trend fitTrend(const std::vector<AsymptoticPoint>& points, double AsymptoticPoint::*field) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& pt : points) {
    if (!pt.inBand) continue;
    const double x = pt.w0p, y = pt.*field;
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  if (n < 2 || det == 0.0) return {n > 0 ? sy / n : kNaN, kNaN};
  return {(sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

}  // namespace

std::string_view toString(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "Pass";
    case CheckStatus::Fail: return "Fail";
    case CheckStatus::Skipped: return "Skipped";
    case CheckStatus::Info: return "Info";
  }
  return "Unknown";
}

const CheckRecord* BoundsReport::find(std::string_view id) const {
  for (const auto& c : checks)
    if (c.checkId == id) return &c;
  return nullptr;
}

bool BoundsReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.status == CheckStatus::Fail; });
}

Hypotheses evaluateHypotheses(const HelfrichParams& params, const DerivedConstants& consts) {
  Hypotheses h;
  h.rootsPositive = params.p > 0.0 && analyzeCubic(params).allRootsPositive;
  h.qNegative = consts.deltaPlus > 0.0;
  h.rNegative = maxROn(params, consts.w0p) < 0.0;
  h.xiPositive = consts.xi > 0.0;
  h.deltaMinusPositive = consts.deltaMinus > 0.0;
  return h;
}

double positiveLobeIntegral(const Trajectory& traj, const Landmarks& lm) {
  return traj.stateA(require(lm.r0, "r0"))(slot::Z);
}

double negativeLobeIntegral(const Trajectory& traj, const Landmarks& lm) {
  return positiveLobeIntegral(traj, lm) - require(lm.zInf, "z_inf");
}

BoundsReport checkSingle(const Trajectory& traj, const Landmarks& lm, const HelfrichParams& params,
                         const DerivedConstants& consts) {
  const double r0 = require(lm.r0, "r0");
  const double wp0 = require(lm.wpAtR0, "w'(r0)");
  const double rInf = require(lm.rInf, "r_inf");
  const double zInf = require(lm.zInf, "z_inf");
  const double w0p = consts.w0p;
  const double dp = consts.deltaPlus;
  const Hypotheses hyp = evaluateHypotheses(params, consts);
  const bool pos = hyp.rootsPositive && hyp.qNegative;
  const bool area = pos && hyp.xiPositive;
  const bool neg = pos && hyp.deltaMinusPositive;

  BoundsReport rep;
  auto& out = rep.checks;

  out.push_back(upper("R0Upper", pos, r0 * r0, 16.0 * w0p / dp));
  out.push_back(upper("R0Upper.constant64", pos, r0 * r0, 64.0 * w0p / dp, true));
  out.push_back(upper("WpR0Upper", pos, wp0, -dp * r0 * r0 / 8.0));

  const double posInt = positiveLobeIntegral(traj, lm);
  const double sqrtXi = consts.xi > 0.0 ? std::sqrt(consts.xi) : kNaN;
  out.push_back(upper("AreaPosUpper", area, posInt, 4.0 * w0p * w0p / (dp * sqrtXi)));
  out.push_back(upper("AreaPosUpper.printed", area, posInt, 4.0 * w0p * w0p / (std::pow(dp, 1.5) * sqrtXi), true));

  // Pointwise curvature estimates on (0, r0).
  PointwiseWorst primeBound, primeBoundPrinted, kappaBound, xiFloor;
  double maxKappaPrime = -std::numeric_limits<double>::infinity(), scaleKappaPrime = 0.0;
  double kappaDrift = 0.0;
  const double rLo = traj.rBegin();
  KappaForm kform(params, w0p, rLo, r0, traj.config);
  for (int i = 0; i < kPointwiseSamples; ++i) {
    const double r = rLo + (r0 - rLo) * (double(i) / kPointwiseSamples);
    const KappaForm::Vec k = kform.at(r);
    const double kappa = k(0), kappaPrime = k(1);
    kappaDrift = std::max(kappaDrift, std::abs(kappa - curvaturesChartA(r, traj.stateA(r)(slot::W), 0.0).meridional));
    maxKappaPrime = std::max(maxKappaPrime, kappaPrime);
    scaleKappaPrime = std::max(scaleKappaPrime, std::abs(kappaPrime));
    primeBound.add(r, kappaPrime, -dp * r / 8.0);
    primeBoundPrinted.add(r, kappaPrime, -dp * r * r / 8.0);
    kappaBound.add(r, kappa, w0p - dp * r * r / 16.0);
    xiFloor.add(r, consts.xi, 1.0 - r * r * kappa * kappa);
  }
  CheckRecord mono = evaluate("KappaMonotone", hyp.rNegative, maxKappaPrime, 0.0, -maxKappaPrime,
                              kRelTol * scaleKappaPrime);
  mono.note = "max kappa' over " + std::to_string(kPointwiseSamples) + " samples";
  const std::string drift = "; |kappa - w/(r sqrt(1+w^2))| <= " + num(kappaDrift);
  mono.note += drift;
  out.push_back(mono);
  out.push_back(pointwise("KappaPrimeBound", pos, primeBound));
  out.push_back(pointwise("KappaPrimeBound.printed", pos, primeBoundPrinted, true));
  out.push_back(pointwise("KappaBound", pos, kappaBound));
  out.push_back(pointwise("XiFloor", area, xiFloor));

  const double x = rInf - r0;
  const double B = std::sqrt(consts.delta * r0 * r0 * std::abs(wp0));
  out.push_back(upper("RInfUpper", neg, x, std::numbers::pi / (2.0 * B)));
  const double deltaProof = std::min(dp / 4.0, consts.deltaMinus / 2.0);
  out.push_back(
      upper("RInfUpper.proofDelta", neg, x, std::numbers::pi / (2.0 * std::sqrt(deltaProof * r0 * r0 * std::abs(wp0))), true));

  const double negInt = negativeLobeIntegral(traj, lm);
  const double bx = B * x;
  const double logSec = bx < std::numbers::pi / 2.0 ? -std::log(std::cos(bx)) / B : kNaN;
  const double quadratic = 0.5 * B * x * x;
  CheckRecord negArea = lower("NegAreaLower", neg, negInt, logSec);
  if (neg && !(bx < std::numbers::pi / 2.0)) negArea.status = CheckStatus::Fail;
  negArea.note = "B = " + num(B) + ", B(r_inf - r0) = " + num(bx);
  out.push_back(negArea);
  out.push_back(upper("NegAreaLower.secant", neg, bx, std::numbers::pi / 2.0));
  out.push_back(lower("NegAreaLower.quadratic", neg, logSec, quadratic));
  out.push_back(lower("NegAreaLower.BChain", neg, B, std::sqrt(consts.delta * dp / 8.0) * r0 * r0, true));

  // w'^2 / (|w| (1+w^2)^{5/2}); chart B form u''^2 / (1+u'^2)^{5/2}.
  {
    double supAll = 0.0, supB = 0.0;
    const double ra = traj.rBegin(), rb = traj.rEnd();
    for (int i = 0; i <= kPointwiseSamples; ++i) {
      const double r = ra + (rb - ra) * (double(i) / kPointwiseSamples);
      const StateVector y = traj.stateA(r);
      const double w = y(slot::W), wp = y(slot::Wp);
      if (std::abs(w) <= 1e-3) continue;
      const double s = 1.0 + w * w;
      supAll = std::max(supAll, wp * wp / (std::abs(w) * s * s * std::sqrt(s)));
    }
    const double za = traj.zBegin(), zb = traj.zEnd();
    for (int i = 0; i <= kPointwiseSamples; ++i) {
      const StateVector y = traj.stateB(za + (zb - za) * (double(i) / kPointwiseSamples));
      const double s = 1.0 + y(slot::Up) * y(slot::Up);
      const double v = y(slot::Upp) * y(slot::Upp) / (s * s * std::sqrt(s));
      supB = std::max(supB, v);
      supAll = std::max(supAll, v);
    }
    const Event* eq = traj.find(EventKind::Equator);
    const double limit = eq->state(slot::Upp) * eq->state(slot::Upp);
    CheckRecord ord = upper("WprimeOrdBounded", true, supB, 2.0 * limit);
    if (!std::isfinite(supAll)) ord.status = CheckStatus::Fail;
    ord.note = "sup over both charts = " + num(supAll) + ", equator limit = " + num(limit);
    out.push_back(ord);
    out.push_back(upper("WprimeOrdBounded.allSamples", true, supAll, 2.0 * limit, true));
  }

  out.push_back(evaluate("ZInfNegative", pos, zInf, 0.0, -zInf, 0.0, false, true));
  out.push_back(evaluate("IntVLowerRatio", pos, negInt / w0p, 0.0, negInt / w0p, 0.0, false, true));
  return rep;
}

PointRun runPoint(const HelfrichParams& params, double w0p, const SolverConfig& cfg) {
  PointRun run;
  run.w0p = w0p;
  run.positiveIntegral = kNaN;
  run.negativeIntegral = kNaN;
  try {
    const Trajectory traj = integrate(params, w0p, cfg);
    run.landmarks = extractLandmarks(traj);
    run.classification = classify(traj, run.landmarks);
    if (run.landmarks.r0) run.positiveIntegral = positiveLobeIntegral(traj, run.landmarks);
    if (run.landmarks.r0 && run.landmarks.zInf) run.negativeIntegral = negativeLobeIntegral(traj, run.landmarks);
    if (run.classification.verdict == Verdict::Biconcave)
      run.bounds = checkSingle(traj, run.landmarks, params, derivedConstants(params, w0p));
  } catch (const Error& e) {
    run.classification = {};
    run.classification.evidence = e.what();
    run.error = e.what();
  }
  return run;
}

std::vector<PointRun> runPoints(const HelfrichParams& params, const std::vector<double>& grid,
                                const SolverConfig& cfg) {
  std::vector<PointRun> runs(grid.size());
  parallelFor(grid.size(), [&](std::size_t i) { runs[i] = runPoint(params, grid[i], cfg); });
  return runs;
}

std::vector<double> geometricGrid(double first, double last, int count) {
  if (count < 1 || !(first > 0.0) || !(last > 0.0)) throw Error(ErrorCode::InvalidConfig, "invalid geometric grid");
  if (count == 1) return {first};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double ratio = std::log(last / first) / (count - 1);
  for (int i = 0; i < count; ++i) grid[std::size_t(i)] = first * std::exp(ratio * i);
  grid.back() = last;
  return grid;
}

AsymptoticReport summarizeAsymptotics(const HelfrichParams& params, const std::vector<PointRun>& runs,
                                      const AsymptoticBands& bands) {
  AsymptoticReport rep;
  rep.p = params.p;
  rep.bands = bands;
  rep.limitRM = 32.0 / (3.0 * params.p);
  rep.limitR0 = 32.0 / params.p;
  rep.limitArea = 8.0 / params.p;
  rep.negativeAreaInfimum = std::numeric_limits<double>::infinity();

  bool ok = true;
  for (const auto& run : runs) {
    if (run.classification.verdict != Verdict::Biconcave) {
      rep.excluded.push_back(run.w0p);
      continue;
    }
    const Landmarks& lm = run.landmarks;
    AsymptoticPoint pt;
    pt.w0p = run.w0p;
    pt.verdict = run.classification.verdict;
    pt.rMRatio = *lm.rM * *lm.rM / run.w0p;
    pt.r0Ratio = *lm.r0 * *lm.r0 / run.w0p;
    pt.slopeRatio = *lm.wpAtR0 / run.w0p;
    pt.positiveArea = run.positiveIntegral / (run.w0p * run.w0p);
    pt.negativeArea = run.negativeIntegral / run.w0p;
    pt.orderedOk = pt.rMRatio <= pt.r0Ratio;
    pt.inBand = run.w0p <= bands.cutoff;
    if (pt.inBand) {
      pt.rMOk = pt.rMRatio >= bands.lowerFactor * rep.limitRM;
      pt.r0Ok = pt.r0Ratio <= bands.upperFactor * rep.limitR0;
      pt.slopeOk = pt.slopeRatio >= bands.slopeLow && pt.slopeRatio <= bands.slopeHigh;
    }
    const bool finite = std::isfinite(pt.rMRatio) && std::isfinite(pt.r0Ratio) && std::isfinite(pt.slopeRatio) &&
                        std::isfinite(pt.positiveArea) && std::isfinite(pt.negativeArea);
    ok = ok && finite && pt.rMOk && pt.r0Ok && pt.slopeOk && pt.orderedOk;
    rep.negativeAreaInfimum = std::min(rep.negativeAreaInfimum, pt.negativeArea);
    rep.points.push_back(pt);
  }

  // Positive-lobe area at the smallest slopes.
  std::vector<std::size_t> order(rep.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.points[a].w0p < rep.points[b].w0p; });
  for (std::size_t k = 0; k < order.size() && int(k) < bands.areaPoints; ++k) {
    AsymptoticPoint& pt = rep.points[order[k]];
    if (!pt.inBand) break;
    pt.areaChecked = true;
    pt.areaOk = pt.positiveArea <= bands.areaFactor * rep.limitArea;
    ok = ok && pt.areaOk;
  }

  rep.rMTrend = fitTrend(rep.points, &AsymptoticPoint::rMRatio);
  rep.r0Trend = fitTrend(rep.points, &AsymptoticPoint::r0Ratio);
  rep.slopeTrend = fitTrend(rep.points, &AsymptoticPoint::slopeRatio);
  rep.positiveAreaTrend = fitTrend(rep.points, &AsymptoticPoint::positiveArea);
  if (rep.points.empty()) rep.negativeAreaInfimum = kNaN;
  rep.passed = ok && !rep.points.empty() && rep.negativeAreaInfimum > 0.0;
  return rep;
}

AsymptoticReport asymptoticSweep(const HelfrichParams& params, const std::vector<double>& grid,
                                 const SolverConfig& cfg, const AsymptoticBands& bands) {
  return summarizeAsymptotics(params, runPoints(params, grid, cfg), bands);
}

std::vector<PhaseRow> phaseSweep(const std::vector<PhaseCell>& cells, const SolverConfig& cfg) {
  std::vector<PhaseRow> rows(cells.size());
  parallelFor(cells.size(), [&](std::size_t i) {
    const PhaseCell& cell = cells[i];
    PhaseRow& row = rows[i];
    row.cell = cell;
    const CubicAnalysis cubic = analyzeCubic(cell.params);
    row.rootsAllPositive = cubic.allRootsPositive;
    row.inHypothesis = cubic.allRootsPositive && cell.params.p > 0.0 && cell.w0p < cubic.smallestPositiveRoot();

    auto classifyAt = [&](double w0p, Landmarks& lm, std::string& error) {
      try {
        const Trajectory traj = integrate(cell.params, w0p, cfg);
        lm = extractLandmarks(traj);
        return classify(traj, lm).verdict;
      } catch (const Error& e) {
        error = e.what();
        return Verdict::Indeterminate;
      }
    };
    row.verdict = classifyAt(cell.w0p, row.landmarks, row.error);
    if (row.inHypothesis && row.verdict != Verdict::Biconcave) {
      Landmarks lm;
      std::string err;
      row.anomaly = classifyAt(cell.w0p / 10.0, lm, err) != Verdict::Biconcave;
    }
  });
  return rows;
}

void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failureMutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace helfrich
