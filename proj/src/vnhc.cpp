#include "giant_swing/vnhc.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

constexpr double kSingularDecoupling = 1e-9;
constexpr double kDriftStep = 1e-7;

FullState make_state(double q_u, double q_a, double p_u, double p_a) {
  FullState x;
  x.q = Vector(2);
  x.p = Vector(2);
  x.q << q_u, q_a;
  x.p << p_u, p_a;
  return x;
}

void require_two_link(const MechanicalSystem& sys) {
  if (sys.dof != 2 || sys.inputs != 1 ||
      std::abs(sys.input_matrix(0, 0)) > 0.0 ||
      std::abs(sys.input_matrix(1, 0) - 1.0) > 1e-14) {
    throw DomainError(
        "constraint machinery needs a 2-DOF system in simply actuated form");
  }
}

// Jet at the manifold point over (q_u, p_u): q_a is set to f itself.
ConstraintJet jet_on_manifold(const Constraint& constraint, ReducedState s) {
  const ConstraintJet guess = constraint(make_state(s.q_u, 0.0, s.p_u, 0.0));
  return constraint(make_state(s.q_u, guess.value, s.p_u, 0.0));
}

// p_a solving e_dot = 0 for h = q_a - f(q_u, p_u), with dM/dq_u = 0:
//   A [0;1] p_a + A [1;0] p_u + f_pu dV/dq_u = 0,  A = dh_q M^{-1}.
double solve_momentum(const Eigen::Matrix2d& inertia_inv, double dv_dqu,
                      const ConstraintJet& jet, double p_u) {
  const Eigen::RowVector2d dh_q(-jet.d_qu, 1.0);
  const Eigen::RowVector2d a = dh_q * inertia_inv;
  const double dh_pu = -jet.d_pu;
  return (dh_pu * dv_dqu - a(0) * p_u) / a(1);
}

Eigen::Vector2d two_link_reduced_field(const Eigen::Matrix2d& inertia_inv,
                                       const Eigen::Vector2d& grad_v,
                                       const ConstraintJet& jet, double p_u) {
  const double p_a = solve_momentum(inertia_inv, grad_v(0), jet, p_u);
  const Eigen::Vector2d q_dot = inertia_inv * Eigen::Vector2d(p_u, p_a);
  return {q_dot(0), -grad_v(0)};
}

}  // namespace

void validate(const VnhcSpec& spec, double leg_limit) {
  if (!(spec.qa_bar > 0.0) || spec.qa_bar > 2.0 * leg_limit / kPi + 1e-12) {
    throw DomainError(fmt::format(
        "qa_bar must lie in ]0, {}], got {}", 2.0 * leg_limit / kPi, spec.qa_bar));
  }
  if (!(spec.qa_bar * kPi / 2.0 < kPi)) {
    throw DomainError("qa_bar too large: the leg would fold past +-pi");
  }
  if (!(spec.k_p > 0.0) || !(spec.k_d > 0.0)) {
    throw DomainError("controller gains k_p and k_d must be positive");
  }
  if (!std::isfinite(spec.I)) throw DomainError("I must be finite");
}

double constraint_f(const VnhcSpec& spec, double p_u) {
  return spec.qa_bar * std::atan(spec.I * p_u);
}

double constraint_slope(const VnhcSpec& spec, double p_u) {
  const double ip = spec.I * p_u;
  return spec.qa_bar * spec.I / (1.0 + ip * ip);
}

Constraint arctan_constraint(const VnhcSpec& spec) {
  return [spec](const FullState& x) {
    const double p_u = x.p(0);
    return ConstraintJet{constraint_f(spec, p_u), 0.0,
                         constraint_slope(spec, p_u)};
  };
}

ConstraintError constraint_error(const MechanicalSystem& sys,
                                 const Constraint& constraint,
                                 const FullState& x) {
  const ConstraintJet jet = constraint(x);
  // e_dot has no tau dependence for a regular constraint; evaluate unforced.
  const Vector field = full_vector_field(sys, x, Vector::Zero(sys.inputs));
  ConstraintError out;
  out.e = x.q(1) - jet.value;
  out.e_dot = -jet.d_qu * field(0) + field(1) - jet.d_pu * field(2);
  return out;
}

double decoupling_value(const MechanicalSystem& sys,
                        const Constraint& constraint, const FullState& x) {
  require_two_link(sys);
  const ConstraintJet jet = constraint(x);
  const Matrix inertia_inv = sys.inertia(x.q).inverse();
  const Matrix inv_grad = inverse_inertia_gradient(sys, x.q);
  const Eigen::RowVector2d dh_q(-jet.d_qu, 1.0);
  const double dh_pu = -jet.d_pu;
  const Eigen::RowVectorXd a = dh_q * inertia_inv;
  // (I_{n-k} kron p^T) grad_{q_u} M^{-1} with n - k = 1.
  const Eigen::RowVectorXd coupling = x.p.transpose() * inv_grad.topRows(2);
  return a(1) - dh_pu * coupling(1);
}

double decoupling_scalar(const MechanicalSystem& sys,
                         const Constraint& constraint, const FullState& x) {
  const double h = decoupling_value(sys, constraint, x);
  if (!(std::abs(h) >= kSingularDecoupling)) {
    throw NumericError("constraint not regular here");
  }
  return h;
}

double decoupling_scalar_closed_form(const SimplifiedParams& params,
                                     double q_a, double df_dqu) {
  const double c = std::cos(q_a);
  const double ml2 = params.m * params.l * params.l;
  return ((1.0 + c) * df_dqu + 3.0 + 2.0 * c) / (ml2 * (2.0 - c * c));
}

double constraint_drift(const MechanicalSystem& sys,
                        const Constraint& constraint, const FullState& x) {
  const int n = sys.dof;
  const Vector field = full_vector_field(sys, x, Vector::Zero(sys.inputs));
  const double speed = field.norm();
  if (speed == 0.0) return 0.0;
  const double size = std::max(1.0, std::hypot(x.q.norm(), x.p.norm()));
  const double dt = kDriftStep * size / speed;
  auto e_dot_at = [&](double sign) {
    FullState shifted = x;
    shifted.q += sign * dt * field.head(n);
    shifted.p += sign * dt * field.tail(n);
    return constraint_error(sys, constraint, shifted).e_dot;
  };
  return (e_dot_at(1.0) - e_dot_at(-1.0)) / (2.0 * dt);
}

double enforcement_torque(const MechanicalSystem& sys,
                          const Constraint& constraint, double k_p,
                          double k_d, const FullState& x) {
  const double h = decoupling_scalar(sys, constraint, x);
  const ConstraintError err = constraint_error(sys, constraint, x);
  const double drift = constraint_drift(sys, constraint, x);
  return -(drift + k_p * err.e + k_d * err.e_dot) / h;
}

double enforcement_torque(const AcrobotModel& model, const VnhcSpec& spec,
                          const FullState& x) {
  return enforcement_torque(model.system(), arctan_constraint(spec), spec.k_p,
                            spec.k_d, x);
}

double momentum_completion_g(const MechanicalSystem& sys,
                             const Constraint& constraint, ReducedState s) {
  require_two_link(sys);
  const ConstraintJet jet = jet_on_manifold(constraint, s);
  Vector q(2);
  q << s.q_u, jet.value;
  const Eigen::Matrix2d inertia_inv = sys.inertia(q).inverse();
  return solve_momentum(inertia_inv, sys.potential_gradient(q)(0), jet, s.p_u);
}

double momentum_completion_g_closed_form(const SimplifiedParams& params,
                                         const VnhcSpec& spec, ReducedState s) {
  const double q_a = constraint_f(spec, s.p_u);
  const double c = std::cos(q_a);
  const double torque_arm = 2.0 * std::sin(s.q_u) + std::sin(s.q_u + q_a);
  const double ip = spec.I * s.p_u;
  const double m = params.m;
  const double l = params.l;
  const double gravity = m * m * params.g * l * l * l;
  return (1.0 + c) * s.p_u / (3.0 + 2.0 * c) -
         gravity * spec.qa_bar * spec.I * (2.0 - c * c) * torque_arm /
             ((3.0 + 2.0 * c) * (1.0 + ip * ip));
}

double momentum_completion_g(const AcrobotModel& model, const VnhcSpec& spec,
                             ReducedState s) {
  if (model.is_simplified()) {
    return momentum_completion_g_closed_form(model.simplified(), spec, s);
  }
  const double q_a = constraint_f(spec, s.p_u);
  const ConstraintJet jet{q_a, 0.0, constraint_slope(spec, s.p_u)};
  return solve_momentum(model.inertia(q_a).inverse(),
                        model.potential_gradient(s.q_u, q_a)(0), jet, s.p_u);
}

Eigen::Vector2d reduced_vector_field(const MechanicalSystem& sys,
                                     const Constraint& constraint,
                                     ReducedState s) {
  require_two_link(sys);
  const ConstraintJet jet = jet_on_manifold(constraint, s);
  Vector q(2);
  q << s.q_u, jet.value;
  const Eigen::Matrix2d inertia_inv = sys.inertia(q).inverse();
  return two_link_reduced_field(inertia_inv, sys.potential_gradient(q), jet,
                                s.p_u);
}

Eigen::Vector2d reduced_vector_field_closed_form(const SimplifiedParams& params,
                                                 const VnhcSpec& spec,
                                                 ReducedState s) {
  const double q_a = constraint_f(spec, s.p_u);
  const double c = std::cos(q_a);
  const double torque_arm = 2.0 * std::sin(s.q_u) + std::sin(s.q_u + q_a);
  const double ip = spec.I * s.p_u;
  const double denom_i = 1.0 + ip * ip;
  const double m = params.m;
  const double l = params.l;
  const double ml2 = m * l * l;
  const double q_dot =
      (denom_i * s.p_u +
       m * m * params.g * l * l * l * spec.qa_bar * spec.I * torque_arm * (1.0 + c)) /
      (ml2 * denom_i * (3.0 + 2.0 * c));
  return {q_dot, -m * params.g * l * torque_arm};
}

Eigen::Vector2d reduced_vector_field(const AcrobotModel& model,
                                     const VnhcSpec& spec, ReducedState s) {
  if (model.is_simplified()) {
    return reduced_vector_field_closed_form(model.simplified(), spec, s);
  }
  const double q_a = constraint_f(spec, s.p_u);
  const ConstraintJet jet{q_a, 0.0, constraint_slope(spec, s.p_u)};
  return two_link_reduced_field(model.inertia(q_a).inverse(),
                                model.potential_gradient(s.q_u, q_a), jet,
                                s.p_u);
}

FullState lift_to_manifold(const MechanicalSystem& sys,
                           const Constraint& constraint, ReducedState s,
                           double e, double e_dot) {
  require_two_link(sys);
  const ConstraintJet jet = jet_on_manifold(constraint, s);
  FullState x = make_state(s.q_u, jet.value + e, s.p_u, 0.0);
  // e_dot is affine in p_a when dM/dq_u = 0; a secant step is exact, a second
  // pass absorbs any residual curvature.
  for (int pass = 0; pass < 2; ++pass) {
    const double base = x.p(1);
    const double r0 = constraint_error(sys, constraint, x).e_dot - e_dot;
    x.p(1) = base + 1.0;
    const double r1 = constraint_error(sys, constraint, x).e_dot - e_dot;
    const double slope = r1 - r0;
    if (slope == 0.0) throw NumericError("cannot solve for p_a on the manifold");
    x.p(1) = base - r0 / slope;
  }
  return x;
}

FullState lift_to_manifold(const AcrobotModel& model, const VnhcSpec& spec,
                           ReducedState s) {
  const double q_a = constraint_f(spec, s.p_u);
  return make_state(s.q_u, q_a, s.p_u, momentum_completion_g(model, spec, s));
}

Vector closed_loop_vector_field(const AcrobotModel& model,
                                const VnhcSpec& spec, const FullState& x) {
  const Constraint constraint = arctan_constraint(spec);
  const double tau = enforcement_torque(model.system(), constraint, spec.k_p,
                                        spec.k_d, x);
  return full_vector_field(model.system(), x, Vector::Constant(1, tau));
}

RegularityReport regularity_check(const MechanicalSystem& sys,
                                  const Constraint& constraint,
                                  const std::vector<FullState>& grid) {
  RegularityReport report;
  report.min_abs_decoupling = std::numeric_limits<double>::infinity();
  report.independent_of_pa = true;
  for (const FullState& x : grid) {
    FullState bumped = x;
    bumped.p(1) += 1.0;
    const ConstraintJet a = constraint(x);
    const ConstraintJet b = constraint(bumped);
    if (a.value != b.value || a.d_qu != b.d_qu || a.d_pu != b.d_pu) {
      report.independent_of_pa = false;
    }
    const double h = std::abs(decoupling_value(sys, constraint, x));
    if (h < report.min_abs_decoupling || report.argmin.q.size() == 0) {
      report.min_abs_decoupling = h;
      report.argmin = x;
    }
  }
  report.regular = report.independent_of_pa && !grid.empty() &&
                   report.min_abs_decoupling >= kSingularDecoupling;
  return report;
}

std::vector<FullState> leg_angle_grid(int points, double q_u, double p_u) {
  std::vector<FullState> grid;
  grid.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double q_a = -kPi + 2.0 * kPi * (i + 1) / points;
    grid.push_back(make_state(q_u, q_a, p_u, 0.0));
  }
  return grid;
}

}  // namespace giant_swing
