#pragma once

// Virtual nonholonomic constraints q_a = f(q_u, p_u) on two-degree-of-freedom
// simply actuated systems (input matrix [0; 1]): the arctan leg-swing
// constraint, the decoupling scalar, the feedback-linearizing controller that
// enforces the constraint, and the reduced dynamics on the constraint
// manifold.

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "giant_swing/acrobot_models.hpp"
#include "giant_swing/mechanics_core.hpp"

namespace giant_swing {

struct VnhcSpec {
  double qa_bar = 1.0;  // leg swing amplitude, rad
  double I = 0.0;       // gain, s / (kg m^2); sign selects injection/dissipation
  double k_p = 100.0;   // 1/s^2
  double k_d = 20.0;    // 1/s
};

/// Largest leg angle the constraint may command.
inline constexpr double kDefaultLegLimit = kPi / 2.0;

/// Checks qa_bar in ]0, 2 leg_limit / pi], positive gains, finite I.
void validate(const VnhcSpec& spec, double leg_limit = kDefaultLegLimit);

/// q_a = qa_bar * atan(I p_u).
double constraint_f(const VnhcSpec& spec, double p_u);
/// df/dp_u = qa_bar I / (1 + I^2 p_u^2).
double constraint_slope(const VnhcSpec& spec, double p_u);

/// Value and first partials of f at a state.
struct ConstraintJet {
  double value = 0.0;
  double d_qu = 0.0;
  double d_pu = 0.0;
};

/// A relation q_a = f(q_u, p_u). The jet is evaluated at a full state so
/// that test constraints may be written in terms of q_a on the manifold.
using Constraint = std::function<ConstraintJet(const FullState&)>;

Constraint arctan_constraint(const VnhcSpec& spec);

/// e = h(q, p) = q_a - f and its time derivative along the flow.
struct ConstraintError {
  double e = 0.0;
  double e_dot = 0.0;
};

ConstraintError constraint_error(const MechanicalSystem& sys,
                                 const Constraint& constraint,
                                 const FullState& x);

/// Coefficient of tau in e_ddot: (A - dh_pu * Mq) [0; 1], where
/// A = dh_q M^{-1} and Mq = p^T d(M^{-1})/dq_u. Throws NumericError
/// ("constraint not regular here") when its magnitude is below 1e-9.
double decoupling_scalar(const MechanicalSystem& sys,
                         const Constraint& constraint, const FullState& x);

/// Same quantity without the singularity check.
double decoupling_value(const MechanicalSystem& sys,
                        const Constraint& constraint, const FullState& x);

/// Closed form for the point-mass acrobot:
/// ((1 + c_a) df/dq_u + 3 + 2 c_a) / (m l^2 (2 - c_a^2)).
double decoupling_scalar_closed_form(const SimplifiedParams& params,
                                     double q_a, double df_dqu = 0.0);

/// Drift E(q, p) of e_ddot = E + H tau: the derivative of e_dot along the
/// unforced vector field, by central differences.
double constraint_drift(const MechanicalSystem& sys,
                        const Constraint& constraint, const FullState& x);

/// tau = -H^{-1} (E + k_p e + k_d e_dot), so that e_ddot = -k_p e - k_d e_dot.
double enforcement_torque(const MechanicalSystem& sys,
                          const Constraint& constraint, double k_p,
                          double k_d, const FullState& x);
double enforcement_torque(const AcrobotModel& model, const VnhcSpec& spec,
                          const FullState& x);

/// p_a on the constraint manifold as a function of (q_u, p_u): solves e = 0,
/// e_dot = 0 for p_a. Requires dM/dq_u = 0.
double momentum_completion_g(const MechanicalSystem& sys,
                             const Constraint& constraint, ReducedState s);
double momentum_completion_g_closed_form(const SimplifiedParams& params,
                                         const VnhcSpec& spec, ReducedState s);
double momentum_completion_g(const AcrobotModel& model, const VnhcSpec& spec,
                             ReducedState s);

/// (q_u_dot, p_u_dot) of the constrained dynamics.
Eigen::Vector2d reduced_vector_field(const MechanicalSystem& sys,
                                     const Constraint& constraint,
                                     ReducedState s);
Eigen::Vector2d reduced_vector_field_closed_form(const SimplifiedParams& params,
                                                 const VnhcSpec& spec,
                                                 ReducedState s);
/// Closed form for the simplified model, generic evaluation otherwise.
Eigen::Vector2d reduced_vector_field(const AcrobotModel& model,
                                     const VnhcSpec& spec, ReducedState s);

/// Full state with given (q_u, p_u) and constraint errors (e, e_dot). With
/// zero errors this is the point of the constraint manifold over s.
FullState lift_to_manifold(const MechanicalSystem& sys,
                           const Constraint& constraint, ReducedState s,
                           double e = 0.0, double e_dot = 0.0);
FullState lift_to_manifold(const AcrobotModel& model, const VnhcSpec& spec,
                           ReducedState s);

/// Closed-loop full dynamics: the 4-vector (q_dot, p_dot) under the
/// enforcement torque.
Vector closed_loop_vector_field(const AcrobotModel& model,
                                const VnhcSpec& spec, const FullState& x);

struct RegularityReport {
  bool regular = false;
  bool independent_of_pa = false;  // dh/dp_a = 0 holds structurally
  double min_abs_decoupling = 0.0;
  FullState argmin;
};

/// Evaluates |decoupling| over the given states and reports the minimum.
/// A zero (below 1e-9) is reported, not thrown.
RegularityReport regularity_check(const MechanicalSystem& sys,
                                  const Constraint& constraint,
                                  const std::vector<FullState>& grid);

/// States with fixed (q_u, p_u) and q_a sweeping a uniform grid on (-pi, pi].
std::vector<FullState> leg_angle_grid(int points, double q_u = 0.3,
                                      double p_u = 0.1);

}  // namespace giant_swing
