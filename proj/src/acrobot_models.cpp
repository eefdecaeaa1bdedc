#include "giant_swing/acrobot_models.hpp"

#include <cmath>

#include <fmt/format.h>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(fmt::format("{} must be positive and finite, got {}",
                                  name, value));
  }
}

// Wraps the 2x2 closed forms of an AcrobotModel as a generic system.
MechanicalSystem wrap_as_system(const AcrobotModel& model) {
  MechanicalSystem sys;
  sys.dof = 2;
  sys.inputs = 1;
  sys.input_matrix = Matrix::Zero(2, 1);
  sys.input_matrix(1, 0) = 1.0;
  sys.periods = {2.0 * kPi, 2.0 * kPi};
  sys.inertia = [model](const Vector& q) {
    return Matrix(model.inertia(q(1)));
  };
  sys.potential = [model](const Vector& q) {
    return model.potential(q(0), q(1));
  };
  sys.potential_gradient = [model](const Vector& q) {
    return Vector(model.potential_gradient(q(0), q(1)));
  };
  sys.inertia_gradient = [model](const Vector& q) {
    Matrix stacked = Matrix::Zero(4, 2);
    stacked.bottomRows(2) = model.inertia_derivative(q(1));
    return stacked;
  };
  return sys;
}

}  // namespace

void validate(const SimplifiedParams& params) {
  require_positive(params.m, "m");
  require_positive(params.l, "l");
  require_positive(params.g, "g");
}

void validate(const DistributedParams& params) {
  require_positive(params.m_u, "m_u");
  require_positive(params.m_a, "m_a");
  require_positive(params.l_u, "l_u");
  require_positive(params.l_a, "l_a");
  require_positive(params.l_cu, "l_cu");
  require_positive(params.l_ca, "l_ca");
  require_positive(params.J_u, "J_u");
  require_positive(params.J_a, "J_a");
  require_positive(params.g, "g");
  if (params.l_cu > params.l_u) {
    throw DomainError("l_cu must not exceed l_u");
  }
  if (params.l_ca > params.l_a) {
    throw DomainError("l_ca must not exceed l_a");
  }
}

AcrobotModel::AcrobotModel(const SimplifiedParams& params) : params_(params) {
  validate(params);
  finish();
}

AcrobotModel::AcrobotModel(const DistributedParams& params) : params_(params) {
  validate(params);
  finish();
}

void AcrobotModel::finish() {
  pendulum_inertia_ = inertia(0.0)(0, 0);
  potential_coefficient_ = 0.5 * (potential(kPi, 0.0) - potential(0.0, 0.0));
  // The generic wrapper copies *this; build it after the scalars are set.
  system_ = MechanicalSystem{};
  system_ = wrap_as_system(*this);
}

const SimplifiedParams& AcrobotModel::simplified() const {
  if (const auto* p = std::get_if<SimplifiedParams>(&params_)) return *p;
  throw DomainError("operation is only defined for the simplified acrobot");
}

Eigen::Matrix2d AcrobotModel::inertia(double q_a) const {
  const double c = std::cos(q_a);
  Eigen::Matrix2d out;
  if (const auto* p = std::get_if<SimplifiedParams>(&params_)) {
    const double ml2 = p->m * p->l * p->l;
    out << ml2 * (3.0 + 2.0 * c), ml2 * (1.0 + c),
           ml2 * (1.0 + c),       ml2;
  } else {
    const auto& d = std::get<DistributedParams>(params_);
    const double m11 = d.m_a * d.l_u * d.l_u + 2.0 * d.m_a * d.l_u * d.l_ca * c +
                       d.m_a * d.l_ca * d.l_ca + d.m_u * d.l_cu * d.l_cu +
                       d.J_u + d.J_a;
    const double m12 = d.m_a * d.l_ca * d.l_ca + d.m_a * d.l_u * d.l_ca * c + d.J_a;
    const double m22 = d.m_a * d.l_ca * d.l_ca + d.J_a;
    out << m11, m12,
           m12, m22;
  }
  return out;
}

Eigen::Matrix2d AcrobotModel::inertia_derivative(double q_a) const {
  const double s = std::sin(q_a);
  Eigen::Matrix2d out;
  if (const auto* p = std::get_if<SimplifiedParams>(&params_)) {
    const double ml2 = p->m * p->l * p->l;
    out << -2.0 * ml2 * s, -ml2 * s,
           -ml2 * s,       0.0;
  } else {
    const auto& d = std::get<DistributedParams>(params_);
    const double k = d.m_a * d.l_u * d.l_ca;
    out << -2.0 * k * s, -k * s,
           -k * s,       0.0;
  }
  return out;
}

double AcrobotModel::potential(double q_u, double q_a) const {
  if (const auto* p = std::get_if<SimplifiedParams>(&params_)) {
    return -p->m * p->g * p->l * (2.0 * std::cos(q_u) + std::cos(q_u + q_a));
  }
  const auto& d = std::get<DistributedParams>(params_);
  return d.g * (d.m_a * d.l_ca * (1.0 - std::cos(q_u + q_a)) +
                (d.m_a * d.l_u + d.m_u * d.l_cu) * (1.0 - std::cos(q_u)));
}

Eigen::Vector2d AcrobotModel::potential_gradient(double q_u, double q_a) const {
  const double s_u = std::sin(q_u);
  const double s_ua = std::sin(q_u + q_a);
  if (const auto* p = std::get_if<SimplifiedParams>(&params_)) {
    const double mgl = p->m * p->g * p->l;
    return {mgl * (2.0 * s_u + s_ua), mgl * s_ua};
  }
  const auto& d = std::get<DistributedParams>(params_);
  return {d.g * (d.m_a * d.l_ca * s_ua + (d.m_a * d.l_u + d.m_u * d.l_cu) * s_u),
          d.g * d.m_a * d.l_ca * s_ua};
}

double AcrobotModel::boundary_momentum() const {
  return std::sqrt(2.0 * pendulum_inertia_ * critical_level());
}

MechanicalSystem simplified_system(const SimplifiedParams& params) {
  return AcrobotModel(params).system();
}

MechanicalSystem distributed_system(const DistributedParams& params) {
  return AcrobotModel(params).system();
}

double nominal_energy(const AcrobotModel& model, ReducedState s) {
  return model.kinetic_coefficient() * s.p_u * s.p_u +
         model.potential(s.q_u, 0.0) - model.potential(0.0, 0.0);
}

double critical_level(const AcrobotModel& model) {
  return model.critical_level();
}

}  // namespace giant_swing
