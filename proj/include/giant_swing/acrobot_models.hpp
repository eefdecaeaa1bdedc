#pragma once

// The two acrobot instances: equal point masses on equal massless links, and
// the distributed-mass two-rod model. Coordinates are q = (q_u, q_a) with the
// torso angle q_u unactuated and the hip angle q_a actuated; B = [0; 1].

#include <Eigen/Dense>

#include <string_view>
#include <variant>

#include "giant_swing/mechanics_core.hpp"

namespace giant_swing {

struct SimplifiedParams {
  double m = 1.0;   // kg
  double l = 1.0;   // m
  double g = 9.81;  // m/s^2
};

struct DistributedParams {
  double m_u = 0.2112;    // kg
  double m_a = 0.1979;    // kg
  double l_u = 0.148;     // m
  double l_a = 0.145;     // m
  double l_cu = 0.073;    // m
  double l_ca = 0.083;    // m
  double J_u = 0.00129;   // kg m^2
  double J_a = 0.00075;   // kg m^2
  double g = 9.81;        // m/s^2

  /// Parameters of the physical test rig (the defaults above).
  static DistributedParams rig() { return {}; }
};

void validate(const SimplifiedParams& params);
void validate(const DistributedParams& params);

/// Torso state on the constraint manifold chart.
struct ReducedState {
  double q_u = 0.0;  // rad
  double p_u = 0.0;  // kg m^2 / s
};

MechanicalSystem simplified_system(const SimplifiedParams& params);
MechanicalSystem distributed_system(const DistributedParams& params);

/// An acrobot with closed-form 2x2 model evaluations. The inertia matrix of
/// both models depends on q_a only.
class AcrobotModel {
 public:
  explicit AcrobotModel(const SimplifiedParams& params);
  explicit AcrobotModel(const DistributedParams& params);

  bool is_simplified() const {
    return std::holds_alternative<SimplifiedParams>(params_);
  }
  /// Throws DomainError for the distributed model.
  const SimplifiedParams& simplified() const;
  const std::variant<SimplifiedParams, DistributedParams>& params() const {
    return params_;
  }
  std::string_view name() const {
    return is_simplified() ? "simplified" : "distributed";
  }

  const MechanicalSystem& system() const { return system_; }

  Eigen::Matrix2d inertia(double q_a) const;
  Eigen::Matrix2d inertia_derivative(double q_a) const;  // dM/dq_a
  double potential(double q_u, double q_a) const;
  Eigen::Vector2d potential_gradient(double q_u, double q_a) const;

  /// m11 at q_a = 0: inertia of the rigid (legs extended) pendulum.
  double pendulum_inertia() const { return pendulum_inertia_; }
  /// Coefficient c in E(q_u, 0) = c (1 - cos q_u).
  double potential_coefficient() const { return potential_coefficient_; }
  /// 1 / (2 m11(0)): coefficient of p_u^2 in the nominal energy.
  double kinetic_coefficient() const { return 0.5 / pendulum_inertia_; }
  /// R_bar = E(pi, 0).
  double critical_level() const { return 2.0 * potential_coefficient_; }
  /// |p_u| where the level set E = R_bar meets the p_u-axis:
  /// sqrt(2 m11(0) R_bar). Equals sqrt(60 m^2 g l^3) for the simplified model.
  double boundary_momentum() const;

 private:
  void finish();

  std::variant<SimplifiedParams, DistributedParams> params_;
  MechanicalSystem system_;
  double pendulum_inertia_ = 0.0;
  double potential_coefficient_ = 0.0;
};

/// Energy of the rigid pendulum obtained with the legs held at q_a = 0:
/// p_u^2 / (2 m11(0)) + V(q_u, 0) - V(0, 0). For the simplified model this is
/// p_u^2 / (10 m l^2) + 3 m g l (1 - cos q_u).
double nominal_energy(const AcrobotModel& model, ReducedState s);
double critical_level(const AcrobotModel& model);

}  // namespace giant_swing
