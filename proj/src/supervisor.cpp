#include "giant_swing/supervisor.hpp"

#include <cmath>

#include <fmt/format.h>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

constexpr double kOnTrigger = 1e-12;
constexpr std::size_t kCaptureExtends = 5;
// Turning values carry integrator drift, about 5e-11 relative per half swing
// along an extend segment. Within this of an edge counts as on it, so a zero
// band still ties to extend.
constexpr double kEdgeSlack = 1e-6;

SupervisorDecision banded(const RegulationConfig& cfg, double value) {
  const double slack = kEdgeSlack * cfg.target;
  if (value < (1.0 - cfg.delta) * cfg.target - slack) return SupervisorDecision::inject;
  if (value > (1.0 + cfg.delta) * cfg.target + slack) return SupervisorDecision::dissipate;
  return SupervisorDecision::extend;
}

// Event index in section_events -> trigger, for the sections this mode uses.
std::optional<Trigger> trigger_of(RegulationMode mode, std::size_t event) {
  if (mode == RegulationMode::oscillation) {
    if (event == 0) return Trigger::q_axis;
    if (event == 2) return Trigger::pi_line;
  } else if (event == 1) {
    return Trigger::p_axis;
  }
  return std::nullopt;
}

SupervisorDecision decide(const RegulationConfig& cfg, Trigger trigger,
                          double& value, ReducedState s) {
  switch (trigger) {
    case Trigger::q_axis:
      value = std::abs(wrap_angle(s.q_u));
      return oscillation_decide(cfg, value);
    case Trigger::pi_line:
      value = kPi;
      return oscillation_decide(cfg, value);
    case Trigger::p_axis:
      value = std::abs(s.p_u);
      return rotation_decide(cfg, value);
  }
  throw DomainError("unknown trigger");
}

}  // namespace

std::string_view to_string(RegulationMode mode) {
  return mode == RegulationMode::oscillation ? "oscillation" : "rotation";
}

std::string_view to_string(SupervisorDecision decision) {
  switch (decision) {
    case SupervisorDecision::inject: return "inject";
    case SupervisorDecision::dissipate: return "dissipate";
    case SupervisorDecision::extend: return "extend";
  }
  return "?";
}

std::string_view to_string(Trigger trigger) {
  switch (trigger) {
    case Trigger::q_axis: return "q_axis";
    case Trigger::p_axis: return "p_axis";
    case Trigger::pi_line: return "pi_line";
  }
  return "?";
}

std::string_view to_string(Dynamics dynamics) {
  return dynamics == Dynamics::reduced ? "reduced" : "full";
}

void validate(const RegulationConfig& cfg, const AcrobotModel& model) {
  if (!(cfg.I_mag > 0.0) || !std::isfinite(cfg.I_mag)) {
    throw DomainError("I_mag must be positive and finite");
  }
  if (cfg.mode == RegulationMode::oscillation) {
    if (!(cfg.target > 0.0 && cfg.target < kPi)) {
      throw DomainError("oscillation target must lie in ]0, pi[");
    }
    const double max_delta = kPi / cfg.target - 1.0;
    if (!(cfg.delta >= 0.0 && cfg.delta <= max_delta)) {
      throw DomainError(fmt::format(
          "oscillation hysteresis must lie in [0, {:.6g}]", max_delta));
    }
    return;
  }
  if (!(cfg.delta >= 0.0 && cfg.delta <= 1.0)) {
    throw DomainError("rotation hysteresis must lie in [0, 1]");
  }
  const double boundary = model.boundary_momentum();
  if (!((1.0 - cfg.delta) * cfg.target > boundary)) {
    throw DomainError(fmt::format(
        "rotation band must stay above the boundary momentum {:.6g}", boundary));
  }
}

SupervisorDecision rotation_decide(const RegulationConfig& cfg, double abs_p_u) {
  return banded(cfg, abs_p_u);
}

SupervisorDecision oscillation_decide(const RegulationConfig& cfg,
                                      double abs_q_u) {
  if (abs_q_u >= kPi) return SupervisorDecision::dissipate;
  return banded(cfg, abs_q_u);
}

double decision_gain(const RegulationConfig& cfg, SupervisorDecision decision) {
  switch (decision) {
    case SupervisorDecision::inject: return cfg.I_mag;
    case SupervisorDecision::dissipate: return -cfg.I_mag;
    case SupervisorDecision::extend: return 0.0;
  }
  return 0.0;
}

double RegulatedRun::gain_at(double t) const {
  for (const GainSegment& seg : segments) {
    if (t <= seg.t_end) return seg.I;
  }
  return segments.empty() ? 0.0 : segments.back().I;
}

RegulatedRun run_regulated(const AcrobotModel& model, const VnhcSpec& base,
                           const RegulationConfig& cfg, ReducedState x0,
                           double duration, const IntegratorConfig& icfg,
                           Dynamics dynamics) {
  validate(cfg, model);
  if (!(duration > 0.0)) throw DomainError("duration must be positive");

  RegulatedRun run;
  run.dynamics = dynamics;
  const StateLayout layout = run.layout();
  SupervisorState& sup = run.supervisor;

  auto take_decision = [&](double t, Trigger trigger, ReducedState s) {
    SwitchRecord rec;
    rec.t = t;
    rec.trigger = trigger;
    rec.decision = decide(cfg, trigger, rec.value, s);
    sup.active = rec.decision;
    sup.switch_log.push_back(rec);
  };

  // A start on a trigger set counts as a trigger.
  if (cfg.mode == RegulationMode::oscillation) {
    if (std::abs(std::cos(0.5 * x0.q_u)) < kOnTrigger) {
      take_decision(0.0, Trigger::pi_line, x0);
    } else if (std::abs(x0.p_u) < kOnTrigger) {
      take_decision(0.0, Trigger::q_axis, x0);
    }
  } else if (std::abs(std::sin(0.5 * x0.q_u)) < kOnTrigger) {
    take_decision(0.0, Trigger::p_axis, x0);
  }

  std::vector<double> x;
  VnhcSpec spec = base;
  spec.I = decision_gain(cfg, sup.active);
  if (dynamics == Dynamics::reduced) {
    x = {x0.q_u, x0.p_u};
  } else {
    const FullState full = lift_to_manifold(model, spec, x0);
    x = {full.q(0), full.q(1), full.p(0), full.p(1)};
  }

  std::vector<EventSpec> events = section_events(layout);
  for (std::size_t i = 0; i < events.size(); ++i) {
    events[i].terminal = trigger_of(cfg.mode, i).has_value();
  }

  IntegratorConfig run_cfg = icfg;
  run_cfg.max_time = duration;
  double t = 0.0;
  while (true) {
    spec.I = decision_gain(cfg, sup.active);
    const VectorField field = dynamics == Dynamics::reduced
                                  ? reduced_field(model, spec)
                                  : closed_loop_field(model, spec);
    IntegrationResult seg = integrate(field, t, x, run_cfg, events);
    std::vector<CrossingRecord> crossings = extract_crossings(seg, model, layout);
    run.crossings.insert(run.crossings.end(), crossings.begin(), crossings.end());
    run.trajectory.append(seg.trajectory);
    run.segments.push_back({t, seg.trajectory.end_time(), spec.I});
    if (!seg.terminated) break;

    const EventHit& hit = seg.events.back();
    t = hit.t;
    x = hit.state;
    take_decision(t, *trigger_of(cfg.mode, hit.event),
                  {x[layout.q_u], x[layout.p_u]});
    if (t >= duration) break;
  }
  return run;
}

CaptureReport band_capture(const RegulatedRun& run, const RegulationConfig& cfg) {
  CaptureReport report;
  const auto& log = run.supervisor.switch_log;
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if (it->decision != SupervisorDecision::extend) break;
    ++report.trailing_extends;
  }
  const Trigger peak = cfg.mode == RegulationMode::oscillation ? Trigger::q_axis
                                                                : Trigger::p_axis;
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if (it->trigger == peak) {
      report.final_value = it->value;
      break;
    }
  }
  if (report.final_value) {
    report.final_in_band = *report.final_value >= (1.0 - cfg.delta) * cfg.target &&
                           *report.final_value <= (1.0 + cfg.delta) * cfg.target;
  }
  report.captured =
      report.trailing_extends >= kCaptureExtends && report.final_in_band;
  return report;
}

}  // namespace giant_swing
