#pragma once

// Hysteresis supervisor that regulates an oscillation amplitude or a rotation
// rate by switching between the injecting constraint (I = +I_mag), the
// dissipating one (I = -I_mag) and legs held straight, re-deciding only when
// the orbit crosses a trigger set.

#include <string_view>
#include <vector>

#include "giant_swing/acrobot_models.hpp"
#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/integrator.hpp"
#include "giant_swing/vnhc.hpp"

namespace giant_swing {

enum class RegulationMode { oscillation, rotation };
enum class SupervisorDecision { inject, dissipate, extend };
enum class Trigger { q_axis, p_axis, pi_line };
enum class Dynamics { reduced, full };

std::string_view to_string(RegulationMode mode);
std::string_view to_string(SupervisorDecision decision);
std::string_view to_string(Trigger trigger);
std::string_view to_string(Dynamics dynamics);

struct RegulationConfig {
  RegulationMode mode = RegulationMode::oscillation;
  double target = kPi / 2.0;  // q_des (rad) or p_des (kg m^2 / s)
  double delta = 0.05;        // hysteresis fraction
  double I_mag = 10.0;
};

/// Oscillation: q_des in ]0, pi[ and delta in [0, pi / q_des - 1].
/// Rotation: delta in [0, 1] and (1 - delta) p_des above the model's boundary
/// momentum. Throws DomainError.
void validate(const RegulationConfig& cfg, const AcrobotModel& model);

/// Below (1 - delta) target: inject; above (1 + delta) target: dissipate;
/// otherwise, band edges included, extend. Edges carry a 1e-6 relative slack
/// so values equal to the edge up to integrator drift tie to extend.
SupervisorDecision rotation_decide(const RegulationConfig& cfg, double abs_p_u);
/// Same rule on |q_u|; |q_u| >= pi always dissipates.
SupervisorDecision oscillation_decide(const RegulationConfig& cfg,
                                      double abs_q_u);

/// The gain a decision selects.
double decision_gain(const RegulationConfig& cfg, SupervisorDecision decision);

struct SwitchRecord {
  double t = 0.0;
  Trigger trigger = Trigger::q_axis;
  double value = 0.0;  // |q_u| or |p_u| at the trigger
  SupervisorDecision decision = SupervisorDecision::extend;
};

struct SupervisorState {
  SupervisorDecision active = SupervisorDecision::extend;
  std::vector<SwitchRecord> switch_log;
};

/// A stretch of the run with one gain in force.
struct GainSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double I = 0.0;
};

struct RegulatedRun {
  Dynamics dynamics = Dynamics::reduced;
  Trajectory trajectory;  // (q_u, p_u) or (q_u, q_a, p_u, p_a)
  SupervisorState supervisor;
  std::vector<GainSegment> segments;
  std::vector<CrossingRecord> crossings;

  /// Gain in force at time t.
  double gain_at(double t) const;
  StateLayout layout() const {
    return dynamics == Dynamics::reduced ? StateLayout::reduced()
                                         : StateLayout::full();
  }
};

/// Starts in extend mode unless x0 already lies on a trigger set, in which
/// case the first decision is taken at t = 0. The full path starts on the
/// constraint manifold of the initial gain; extend then means tracking
/// q_a = 0 through the controller.
RegulatedRun run_regulated(const AcrobotModel& model, const VnhcSpec& base,
                           const RegulationConfig& cfg, ReducedState x0,
                           double duration, const IntegratorConfig& icfg,
                           Dynamics dynamics = Dynamics::reduced);

struct CaptureReport {
  std::size_t trailing_extends = 0;  // consecutive extend decisions at the end
  std::optional<double> final_value;  // last trigger value
  bool final_in_band = false;
  bool captured = false;  // >= 5 trailing extends and final value in band
};

CaptureReport band_capture(const RegulatedRun& run, const RegulationConfig& cfg);

}  // namespace giant_swing
