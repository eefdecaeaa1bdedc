#include "giant_swing/energy_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

constexpr double kMonotoneSlack = 1e-9;

ReducedState reduced_of(std::span<const double> x, StateLayout layout) {
  return {x[layout.q_u], x[layout.p_u]};
}

double energy_at(const AcrobotModel& model, std::span<const double> x,
                 StateLayout layout) {
  return nominal_energy(model, reduced_of(x, layout));
}

Trend trend_of(const std::vector<CrossingRecord>& run) {
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < run.size(); ++i) {
    const double d = run[i].norm - run[i - 1].norm;
    if (!(d > kMonotoneSlack)) up = false;
    if (!(d < -kMonotoneSlack)) down = false;
  }
  if (up) return Trend::gaining;
  if (down) return Trend::losing;
  return Trend::non_monotone;
}

// The run of P_o or P_r records the verdict is read from, and its kind.
std::pair<MotionKind, std::vector<CrossingRecord>> sample_run(
    const std::vector<CrossingRecord>& crossings) {
  const auto first = std::find_if(
      crossings.begin(), crossings.end(), [](const CrossingRecord& c) {
        return c.section == Section::P_o || c.section == Section::P_r;
      });
  if (first == crossings.end()) return {MotionKind::oscillation, {}};
  const Section wanted = first->section;
  const MotionKind kind =
      wanted == Section::P_o ? MotionKind::oscillation : MotionKind::rotation;
  std::vector<CrossingRecord> run;
  for (auto it = first; it != crossings.end(); ++it) {
    if (it->section == wanted) {
      run.push_back(*it);
      continue;
    }
    const bool breaks = kind == MotionKind::oscillation
                            ? (it->section == Section::P_r ||
                               it->section == Section::pi_line)
                            : (it->section == Section::P_o ||
                               it->section == Section::q_axis);
    if (breaks) break;
  }
  return {kind, std::move(run)};
}

EnergyVerdict verdict_core(const std::vector<CrossingRecord>& crossings,
                           double R1, double R2) {
  if (!(R1 <= R2)) throw DomainError("verdict needs R1 <= R2");
  auto [kind, run] = sample_run(crossings);
  if (run.size() < 3) throw DomainError("insufficient crossings");
  EnergyVerdict v;
  v.kind = kind;
  v.trend = trend_of(run);
  v.samples = run.size();
  return v;
}

}  // namespace

Region classify(const AcrobotModel& model, ReducedState s, double tol) {
  const double diff = nominal_energy(model, s) - model.critical_level();
  if (std::abs(diff) <= tol) return Region::boundary;
  return diff < 0.0 ? Region::oscillation : Region::rotation;
}

std::string_view to_string(Section section) {
  switch (section) {
    case Section::P_o: return "P_o";
    case Section::P_r: return "P_r";
    case Section::q_axis: return "q_axis";
    case Section::p_axis: return "p_axis";
    case Section::pi_line: return "pi_line";
  }
  return "?";
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::oscillation: return "oscillation";
    case Region::rotation: return "rotation";
    case Region::boundary: return "boundary";
  }
  return "?";
}

std::string_view to_string(MotionKind kind) {
  return kind == MotionKind::oscillation ? "oscillation" : "rotation";
}

std::string_view to_string(Trend trend) {
  switch (trend) {
    case Trend::gaining: return "gaining";
    case Trend::losing: return "losing";
    case Trend::non_monotone: return "non-monotone";
  }
  return "?";
}

double crossing_norm(ReducedState s) {
  return std::hypot(wrap_angle(s.q_u), s.p_u);
}

double q_axis_guard(std::span<const double> x, StateLayout layout) {
  return x[layout.p_u];
}

double p_axis_guard(std::span<const double> x, StateLayout layout) {
  return std::sin(0.5 * x[layout.q_u]);
}

double pi_line_guard(std::span<const double> x, StateLayout layout) {
  return std::cos(0.5 * x[layout.q_u]);
}

std::vector<EventSpec> section_events(StateLayout layout) {
  std::vector<EventSpec> events(kSectionEventCount);
  events[0] = {"q_axis",
               [layout](double, std::span<const double> x) {
                 return q_axis_guard(x, layout);
               },
               Direction::any, false};
  events[1] = {"p_axis",
               [layout](double, std::span<const double> x) {
                 return p_axis_guard(x, layout);
               },
               Direction::any, false};
  events[2] = {"pi_line",
               [layout](double, std::span<const double> x) {
                 return pi_line_guard(x, layout);
               },
               Direction::any, false};
  return events;
}

EventSpec energy_level_event(const AcrobotModel& model, double level,
                             Direction direction, bool terminal,
                             StateLayout layout) {
  return {"energy_level",
          [model, level, layout](double, std::span<const double> x) {
            return energy_at(model, x, layout) - level;
          },
          direction, terminal};
}

std::vector<CrossingRecord> extract_crossings(const IntegrationResult& run,
                                              const AcrobotModel& model,
                                              StateLayout layout) {
  const double r_bar = model.critical_level();
  std::vector<CrossingRecord> out;
  for (const EventHit& hit : run.events) {
    if (hit.event >= kSectionEventCount) continue;
    CrossingRecord rec;
    rec.t = hit.t;
    const ReducedState raw = reduced_of(hit.state, layout);
    rec.state = {wrap_angle(raw.q_u), raw.p_u};
    rec.norm = crossing_norm(rec.state);
    const double energy = nominal_energy(model, raw);
    switch (hit.event) {
      case 0:
        rec.section = (rec.state.q_u > 0.0 && energy < r_bar) ? Section::P_o
                                                              : Section::q_axis;
        break;
      case 1:
        rec.section = energy > r_bar ? Section::P_r : Section::p_axis;
        break;
      default:
        rec.section = Section::pi_line;
        break;
    }
    out.push_back(rec);
  }
  return out;
}

EnergyVerdict verdict(const std::vector<CrossingRecord>& crossings, double R1,
                      double R2, const AcrobotModel& model) {
  EnergyVerdict v = verdict_core(crossings, R1, R2);
  if (v.trend == Trend::non_monotone) return v;
  const bool gaining = v.trend == Trend::gaining;
  const double level = gaining ? R2 : R1;
  for (const CrossingRecord& c : crossings) {
    const double e = nominal_energy(model, c.state);
    if (gaining ? e >= level : e <= level) {
      v.exit_time = c.t;
      v.exit_level = level;
      break;
    }
  }
  return v;
}

EnergyVerdict verdict(const std::vector<CrossingRecord>& crossings, double R1,
                      double R2, const AcrobotModel& model,
                      const Trajectory& trajectory, StateLayout layout) {
  EnergyVerdict v = verdict_core(crossings, R1, R2);
  if (v.trend == Trend::non_monotone) return v;
  const bool gaining = v.trend == Trend::gaining;
  const double level = gaining ? R2 : R1;
  v.exit_time = first_level_time(trajectory, model, level, gaining, layout);
  if (v.exit_time) v.exit_level = level;
  return v;
}

std::optional<double> first_level_time(const Trajectory& trajectory,
                                       const AcrobotModel& model, double level,
                                       bool rising, StateLayout layout) {
  const double sign = rising ? 1.0 : -1.0;
  auto excess = [&](std::span<const double> x) {
    return sign * (energy_at(model, x, layout) - level);
  };
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (excess(trajectory.state(i)) < 0.0) continue;
    if (i == 0) return trajectory.time(0);
    double lo = trajectory.time(i - 1);
    double hi = trajectory.time(i);
    for (int k = 0; k < 100 && hi - lo > 1e-13 * std::max(1.0, hi); ++k) {
      const double mid = 0.5 * (lo + hi);
      if (excess(trajectory.at(mid)) >= 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }
  return std::nullopt;
}

std::optional<RotationOnset> rotation_onset(
    const std::vector<CrossingRecord>& crossings) {
  std::optional<double> last_axis;
  for (const CrossingRecord& c : crossings) {
    if (c.section == Section::pi_line) {
      return RotationOnset{c.t, last_axis};
    }
    if (c.section == Section::p_axis || c.section == Section::P_r) {
      last_axis = std::abs(c.state.p_u);
    }
  }
  return std::nullopt;
}

VectorField reduced_field(const AcrobotModel& model, const VnhcSpec& spec) {
  return [model, spec](double, std::span<const double> x, std::span<double> dxdt) {
    const Eigen::Vector2d f = reduced_vector_field(model, spec, {x[0], x[1]});
    dxdt[0] = f(0);
    dxdt[1] = f(1);
  };
}

VectorField closed_loop_field(const AcrobotModel& model, const VnhcSpec& spec) {
  return [model, spec](double, std::span<const double> x, std::span<double> dxdt) {
    FullState s{Vector(2), Vector(2)};
    s.q << x[0], x[1];
    s.p << x[2], x[3];
    const Vector f = closed_loop_vector_field(model, spec, s);
    for (int i = 0; i < 4; ++i) dxdt[static_cast<std::size_t>(i)] = f(i);
  };
}

SimulationRun simulate_reduced(const AcrobotModel& model, const VnhcSpec& spec,
                               ReducedState x0, double duration,
                               const IntegratorConfig& cfg,
                               std::vector<EventSpec> extra, double t0) {
  std::vector<EventSpec> events = section_events(StateLayout::reduced());
  for (EventSpec& e : extra) events.push_back(std::move(e));
  IntegratorConfig run_cfg = cfg;
  run_cfg.max_time = t0 + duration;
  const double start[2] = {x0.q_u, x0.p_u};
  SimulationRun run;
  run.result = integrate(reduced_field(model, spec), t0, start, run_cfg, events);
  run.crossings = extract_crossings(run.result, model, StateLayout::reduced());
  return run;
}

SimulationRun simulate_full(const AcrobotModel& model, const VnhcSpec& spec,
                            const FullState& x0, double duration,
                            const IntegratorConfig& cfg,
                            std::vector<EventSpec> extra, double t0) {
  if (x0.dof() != 2 || x0.p.size() != 2) {
    throw DomainError("full acrobot state needs two coordinates and momenta");
  }
  std::vector<EventSpec> events = section_events(StateLayout::full());
  for (EventSpec& e : extra) events.push_back(std::move(e));
  IntegratorConfig run_cfg = cfg;
  run_cfg.max_time = t0 + duration;
  const double start[4] = {x0.q(0), x0.q(1), x0.p(0), x0.p(1)};
  SimulationRun run;
  run.result =
      integrate(closed_loop_field(model, spec), t0, start, run_cfg, events);
  run.crossings = extract_crossings(run.result, model, StateLayout::full());
  return run;
}

}  // namespace giant_swing
