#include <algorithm>
#include <array>
#include <functional>

#include "helfrich/shape_ode.hpp"

namespace helfrich {
namespace {

// Sub-intervals per step scanned for sign changes, so an event function
// with two roots inside one step is still caught at its first root.
constexpr int kScanPoints = 8;

int priority(EventKind kind) {
  switch (kind) {
    case EventKind::MaxOfW: return 0;
    case EventKind::ZeroOfW: return 1;
    case EventKind::ChartSwitch: return 2;
    case EventKind::BlowUpPositive: return 3;
    case EventKind::Equator: return 4;
    case EventKind::Aborted: return 5;
  }
  return 6;
}

struct EventFunction {
  EventKind kind;
  int direction;  // +1: crosses - to +, -1: crosses + to -
  bool terminal;
  std::function<double(double t, const StateVector& y)> g;
  std::string detail;
};

struct Crossing {
  double t;
  const EventFunction* fn;
};

bool crosses(double before, double after, int direction) {
  return direction > 0 ? (before < 0.0 && after >= 0.0) : (before > 0.0 && after <= 0.0);
}

// First root of fn inside the accepted step, located on the dense output.
std::optional<double> firstRoot(const Step& step, const EventFunction& fn, double eventTol) {
  double tPrev = step.t0;
  double gPrev = fn.g(tPrev, step.value(tPrev));
  for (int j = 1; j <= kScanPoints; ++j) {
    const double t = j == kScanPoints ? step.tEnd : step.t0 + step.h * (double(j) / kScanPoints);
    const double gt = fn.g(t, step.value(t));
    if (crosses(gPrev, gt, fn.direction)) {
      double lo = tPrev, hi = t;
      for (int iter = 0; iter < 200 && std::abs(hi - lo) > eventTol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double gm = fn.g(mid, step.value(mid));
        if (crosses(gPrev, gm, fn.direction)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    tPrev = t;
    gPrev = gt;
  }
  return std::nullopt;
}

enum class Outcome { Continue, Switch, Stop };

struct ChartRun {
  Outcome outcome = Outcome::Stop;
  double t = 0.0;
  StateVector y;
};

// Integrates one chart until a terminal event fires. Non-terminal events
// are recorded at most once each.
ChartRun runChart(const std::function<StateVector(double, const StateVector&)>& f, Chart chart, double t0,
                  const StateVector& y0, double h0, const std::vector<EventFunction>& events,
                  const SolverConfig& cfg, std::vector<Step>& steps, Trajectory& traj) {
  DormandPrince<7> dp(cfg.relTol, cfg.absTol);
  double t = t0;
  StateVector y = y0;
  StateVector k1 = f(t, y);
  double h = h0;
  double prevErr = 1e-4;
  std::vector<bool> fired(events.size(), false);

  for (;;) {
    if (traj.stepCount >= cfg.maxSteps) {
      traj.events.push_back({EventKind::Aborted, chart, t, y});
      traj.status = TrajectoryStatus::Aborted;
      traj.detail = "maxSteps exceeded";
      return {Outcome::Stop, t, y};
    }
    if (std::abs(h) < 1e-14 * (1.0 + std::abs(t)))
      throw Error(ErrorCode::StepUnderflow,
                  "step size " + std::to_string(h) + " at " + (chart == Chart::A ? "r = " : "z = ") +
                      std::to_string(t));
    ++traj.stepCount;

    TrialStep<7> trial;
    try {
      trial = dp.step(f, t, y, k1, h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveRadius) throw;
      trial.errorNorm = std::numeric_limits<double>::infinity();
    }
    if (!(trial.errorNorm <= 1.0)) {
      h = dp.proposeStep(h, trial.errorNorm, prevErr, false);
      continue;
    }

    std::vector<Crossing> found;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (fired[i]) continue;
      if (auto root = firstRoot(trial.dense, events[i], cfg.eventTol)) found.push_back({*root, &events[i]});
    }
    const double sign = h > 0.0 ? 1.0 : -1.0;
    std::sort(found.begin(), found.end(), [&](const Crossing& a, const Crossing& b) {
      if (a.t != b.t) return sign * a.t < sign * b.t;
      return priority(a.fn->kind) < priority(b.fn->kind);
    });

    for (const auto& c : found) {
      const StateVector ye = trial.dense.value(c.t);
      traj.events.push_back({c.fn->kind, chart, c.t, ye});
      fired[std::size_t(c.fn - events.data())] = true;
      if (!c.fn->terminal) continue;

      Step cut = trial.dense;
      cut.tEnd = c.t;
      steps.push_back(cut);
      if (c.fn->kind == EventKind::ChartSwitch) return {Outcome::Switch, c.t, ye};
      switch (c.fn->kind) {
        case EventKind::Equator: traj.status = TrajectoryStatus::Equator; break;
        case EventKind::BlowUpPositive: traj.status = TrajectoryStatus::BlowUpPositive; break;
        default: traj.status = TrajectoryStatus::Aborted; break;
      }
      traj.detail = c.fn->detail;
      return {Outcome::Stop, c.t, ye};
    }

    steps.push_back(trial.dense);
    t = trial.dense.tEnd;
    y = trial.y;
    k1 = trial.dydt;
    h = dp.proposeStep(h, trial.errorNorm, prevErr, true);
  }
}

// Index of the step containing t; steps are contiguous and ordered in the
// direction of integration.
const Step& locate(const std::vector<Step>& steps, double t, bool increasing, const char* what) {
  if (steps.empty()) throw Error(ErrorCode::OutOfRange, std::string(what) + " is empty");
  const double lo = increasing ? steps.front().t0 : steps.back().tEnd;
  const double hi = increasing ? steps.back().tEnd : steps.front().t0;
  if (!(t >= lo && t <= hi))
    throw Error(ErrorCode::OutOfRange, std::string(what) + " query " + std::to_string(t) + " outside [" +
                                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
  auto it = std::partition_point(steps.begin(), steps.end(), [&](const Step& s) {
    return increasing ? s.tEnd < t : s.tEnd > t;
  });
  if (it == steps.end()) --it;
  return *it;
}

}  // namespace

const Event* Trajectory::find(EventKind kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return &e;
  return nullptr;
}

double Trajectory::rEnd() const { return chartA.empty() ? start.r : chartA.back().tEnd; }

double Trajectory::zBegin() const {
  if (chartB.empty()) throw Error(ErrorCode::MissingEvent, "trajectory has no chart-B segment");
  return chartB.front().t0;
}

double Trajectory::zEnd() const {
  if (chartB.empty()) throw Error(ErrorCode::MissingEvent, "trajectory has no chart-B segment");
  return chartB.back().tEnd;
}

StateVector Trajectory::stateA(double r) const { return locate(chartA, r, true, "chart A").value(r); }
StateVector Trajectory::derivativeA(double r) const { return locate(chartA, r, true, "chart A").derivative(r); }
StateVector Trajectory::stateB(double z) const { return locate(chartB, z, false, "chart B").value(z); }
StateVector Trajectory::derivativeB(double z) const { return locate(chartB, z, false, "chart B").derivative(z); }

Trajectory integrateProfile(const ProfileModel& model, const ChartAState& start, const SolverConfig& cfg,
                            double w0p) {
  cfg.validate();
  Trajectory traj;
  traj.params = model.params();
  traj.w0p = w0p;
  traj.axisCurvature = model.axisCurvature();
  traj.config = cfg;
  traj.start = start;
  const double rMax = cfg.resolvedRMax(traj.params, std::max(w0p, 0.0));
  const double wSwitch = cfg.wSwitch;

  const std::vector<EventFunction> eventsA = {
      {EventKind::MaxOfW, -1, false, [](double, const StateVector& y) { return y(slot::Wp); }, ""},
      {EventKind::ZeroOfW, -1, false, [](double, const StateVector& y) { return y(slot::W); }, ""},
      {EventKind::ChartSwitch, -1, true,
       [wSwitch](double, const StateVector& y) { return y(slot::W) + wSwitch; }, ""},
      {EventKind::BlowUpPositive, +1, true,
       [wSwitch](double, const StateVector& y) { return y(slot::W) - wSwitch; }, "w reached +wSwitch"},
      {EventKind::Aborted, +1, true, [rMax](double r, const StateVector&) { return r - rMax; },
       "r exceeded rMax"},
  };

  auto fA = [&model](double r, const StateVector& y) { return model.chartA(r, y); };
  const double hA = 0.5 * start.r;
  const ChartRun a = runChart(fA, Chart::A, start.r, start.vector(), hA, eventsA, cfg, traj.chartA, traj);
  if (a.outcome != Outcome::Switch) return traj;

  const ChartBState b0 = chartSwitch(ChartAState::fromVector(a.t, a.y));
  const std::vector<EventFunction> eventsB = {
      {EventKind::Equator, +1, true, [](double, const StateVector& y) { return y(slot::Up); }, "u' reached 0"},
      {EventKind::Aborted, +1, true, [rMax](double, const StateVector& y) { return y(slot::U) - rMax; },
       "u exceeded rMax"},
      {EventKind::Aborted, -1, true, [](double, const StateVector& y) { return y(slot::Up) + 1.0; },
       "profile flattened below |w| = 1 in chart B"},
  };
  auto fB = [&model](double z, const StateVector& y) { return model.chartB(z, y); };
  // dz = w dr, so the last chart-A scale carries over.
  const double lastH = traj.chartA.empty() ? start.r : std::abs(traj.chartA.back().h);
  const double hB = -std::min(0.1 * std::abs(b0.up) * b0.u + 1e-12, std::max(lastH * wSwitch, 1e-8));
  runChart(fB, Chart::B, b0.z, b0.vector(), hB, eventsB, cfg, traj.chartB, traj);
  return traj;
}

Trajectory integrate(const HelfrichParams& params, double w0p, const SolverConfig& cfg) {
  if (!(w0p > 0.0) || !std::isfinite(w0p)) throw Error(ErrorCode::InvalidSlope, "initial slope must be positive");
  cfg.validate();
  const ChartAState start = seriesStart(params, w0p, cfg.resolvedEpsStart(params, w0p));
  return integrateProfile(ShapeEquation(params, w0p), start, cfg, w0p);
}

}  // namespace helfrich
