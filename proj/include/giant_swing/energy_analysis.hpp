#pragma once

// Level sets of the nominal energy, Poincare-section crossings of simulated
// orbits and the gaining/losing-energy verdicts built on them. Also hosts the
// simulation drivers for the reduced and full closed-loop dynamics, since the
// section events are defined here.

#include <optional>
#include <string_view>
#include <vector>

#include "giant_swing/acrobot_models.hpp"
#include "giant_swing/integrator.hpp"
#include "giant_swing/vnhc.hpp"

namespace giant_swing {

enum class Region { oscillation, rotation, boundary };

/// Compares nominal_energy(s) with R_bar; |E - R_bar| <= tol is the boundary.
Region classify(const AcrobotModel& model, ReducedState s, double tol = 1e-9);

/// p_u = 0 crossings are q_axis, promoted to P_o when q_u > 0 and E < R_bar.
/// q_u = 0 (mod 2 pi) crossings are p_axis, promoted to P_r when E > R_bar.
/// pi_line marks |q_u| = pi.
enum class Section { P_o, P_r, q_axis, p_axis, pi_line };

std::string_view to_string(Section section);
std::string_view to_string(Region region);

struct CrossingRecord {
  double t = 0.0;
  ReducedState state;  // q_u wrapped to (-pi, pi]
  Section section = Section::q_axis;
  double norm = 0.0;
};

/// Euclidean norm of (wrap(q_u), p_u).
double crossing_norm(ReducedState s);

/// Where q_u and p_u sit in the integrated state vector.
struct StateLayout {
  std::size_t q_u = 0;
  std::size_t p_u = 1;
  static StateLayout reduced() { return {0, 1}; }
  static StateLayout full() { return {0, 2}; }
};

/// Smooth guards: p_u, sin(q_u / 2) and cos(q_u / 2). The latter two vanish
/// on q_u = 0 and |q_u| = pi without a seam at the wrap.
double q_axis_guard(std::span<const double> x, StateLayout layout = {});
double p_axis_guard(std::span<const double> x, StateLayout layout = {});
double pi_line_guard(std::span<const double> x, StateLayout layout = {});

/// The three section events, non-terminal, in the order q_axis, p_axis,
/// pi_line. Hits of these indices are what extract_crossings reads.
std::vector<EventSpec> section_events(StateLayout layout = {});
inline constexpr std::size_t kSectionEventCount = 3;

/// Crosses nominal energy `level` in `direction`.
EventSpec energy_level_event(const AcrobotModel& model, double level,
                             Direction direction, bool terminal,
                             StateLayout layout = {});

/// Labels the hits of section_events (indices below kSectionEventCount;
/// other events are skipped). Records come out in time order.
std::vector<CrossingRecord> extract_crossings(const IntegrationResult& run,
                                              const AcrobotModel& model,
                                              StateLayout layout = {});

enum class MotionKind { oscillation, rotation };
enum class Trend { gaining, losing, non_monotone };

std::string_view to_string(MotionKind kind);
std::string_view to_string(Trend trend);

struct EnergyVerdict {
  MotionKind kind = MotionKind::oscillation;
  Trend trend = Trend::non_monotone;
  std::optional<double> exit_time;
  std::optional<double> exit_level;
  std::size_t samples = 0;  // crossings the trend was read from
};

/// Reads the trend from the first unbroken run of P_o (oscillation) or P_r
/// (rotation) crossings. Consecutive norms must differ by more than 1e-9.
/// The exit is the first crossing whose nominal energy reaches R2 when
/// gaining, or R1 when losing; exit_level is that threshold. Throws DomainError("insufficient crossings")
/// with fewer than three samples.
EnergyVerdict verdict(const std::vector<CrossingRecord>& crossings, double R1,
                      double R2, const AcrobotModel& model);
/// As above, with the exit time located on the trajectory itself.
EnergyVerdict verdict(const std::vector<CrossingRecord>& crossings, double R1,
                      double R2, const AcrobotModel& model,
                      const Trajectory& trajectory,
                      StateLayout layout = StateLayout::reduced());

/// First time nominal energy reaches `level` along the trajectory, going up
/// (rising) or down.
std::optional<double> first_level_time(const Trajectory& trajectory,
                                       const AcrobotModel& model, double level,
                                       bool rising, StateLayout layout);

/// First passage through |q_u| = pi, with |p_u| at the last q_u = 0 crossing
/// before it (where the orbit went over the top).
struct RotationOnset {
  double t = 0.0;
  std::optional<double> p_u_at_axis;
};
std::optional<RotationOnset> rotation_onset(
    const std::vector<CrossingRecord>& crossings);

VectorField reduced_field(const AcrobotModel& model, const VnhcSpec& spec);
/// Closed-loop 4-D dynamics, state order (q_u, q_a, p_u, p_a).
VectorField closed_loop_field(const AcrobotModel& model, const VnhcSpec& spec);

struct SimulationRun {
  IntegrationResult result;
  std::vector<CrossingRecord> crossings;
};

/// Integrates the reduced dynamics from t0 to t0 + duration with the section
/// events followed by `extra` events.
SimulationRun simulate_reduced(const AcrobotModel& model, const VnhcSpec& spec,
                               ReducedState x0, double duration,
                               const IntegratorConfig& cfg,
                               std::vector<EventSpec> extra = {},
                               double t0 = 0.0);

/// Full closed loop from x0 (a 4-vector).
SimulationRun simulate_full(const AcrobotModel& model, const VnhcSpec& spec,
                            const FullState& x0, double duration,
                            const IntegratorConfig& cfg,
                            std::vector<EventSpec> extra = {}, double t0 = 0.0);

}  // namespace giant_swing
