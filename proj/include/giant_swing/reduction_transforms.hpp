#pragma once

// Polar charts for the reduced dynamics of the point-mass acrobot, in which
// the level sets of the nominal energy become circles r = const:
//
//   oscillations (E < R_bar):  r = acos(cos q_u - p_u^2 / K), q_u = r cos(theta)
//   rotations    (E > R_bar):  r = sqrt(p_u^2 + K (1 - cos q_u)), theta = +-q_u
//
// with K = 30 m^2 g l^3. Along an orbit dr/dtheta = g(r, theta, I), and
// g(r, theta, 0) = 0; the I-derivative of g at I = 0 gives the gain integrands
// a and b and a first-order prediction of the one-revolution return map.
//
// Everything here requires the simplified model; the distributed model is
// rejected with DomainError.

#include <Eigen/Dense>

#include "giant_swing/acrobot_models.hpp"
#include "giant_swing/integrator.hpp"
#include "giant_swing/vnhc.hpp"

namespace giant_swing {

enum class Chart { oscillation, rotation_plus, rotation_minus };

struct PolarState {
  double r = 0.0;
  double theta = 0.0;  // [0, 2 pi)
  Chart chart = Chart::oscillation;
};

/// K = 30 m^2 g l^3.
double polar_constant(const AcrobotModel& model);

/// Throws DomainError("not in oscillation chart") outside E < R_bar or at the
/// origin.
PolarState to_polar_osc(const AcrobotModel& model, ReducedState s);
ReducedState from_polar_osc(const AcrobotModel& model, double r, double theta);

/// Branch + needs p_u > 0, branch - needs p_u < 0, and E > R_bar; otherwise
/// DomainError("not in rotation chart").
PolarState to_polar_rot(const AcrobotModel& model, ReducedState s, bool plus);
ReducedState from_polar_rot(const AcrobotModel& model, double r, double theta,
                            bool plus);

PolarState to_polar(const AcrobotModel& model, ReducedState s, Chart chart);
ReducedState from_polar(const AcrobotModel& model, const PolarState& x);

/// Unperturbed angular speed in the oscillation chart,
/// sqrt(6g/5l) sqrt((cos(r c) - cos r) / (r^2 s^2)). The removable
/// singularities at theta in {0, pi} are handled by factoring out sin(theta);
/// the value there equals sqrt(6 g sin r / (10 l r)).
double f_theta_osc(const AcrobotModel& model, double r, double theta);

/// sqrt(r^2 - K (1 - cos theta)) / (5 m l^2); DomainError if the root is
/// imaginary.
double f_theta_rot(const AcrobotModel& model, double r, double theta);

/// (r_dot, theta_dot) of the reduced dynamics seen through the chart.
Eigen::Vector2d polar_vector_field(const AcrobotModel& model,
                                   const VnhcSpec& spec, const PolarState& x);

/// dr/dtheta = r_dot / theta_dot.
double polar_slope(const AcrobotModel& model, const VnhcSpec& spec,
                   const PolarState& x);

/// L = qa_bar sqrt(K) / 15, the scale of the oscillation integrand.
double gain_scale(const AcrobotModel& model, const VnhcSpec& spec);

/// a(r, theta) with d/dI g(r, theta, 0) = L a(r, theta). Independent of the
/// physical parameters.
double integrand_a(double r, double theta);

/// Integral of a over one revolution; r in ]0, pi[. Throws NumericError with
/// the achieved estimate when the quadrature does not converge.
double osc_gain_integral(double r);

/// b(r, theta) = d/dI g(r, theta, 0) in the rotation chart.
double integrand_b(const AcrobotModel& model, const VnhcSpec& spec, double r,
                   double theta);

/// S(r): integral of b over one revolution. Refuses r within 1e-4 of the
/// boundary sqrt(2 K), where b blows up at theta = pi.
double rotation_gain_integral(const AcrobotModel& model, const VnhcSpec& spec,
                              double r);

/// r0 + I L osc_gain_integral(r0) or r0 + I S(r0).
double poincare_first_order(const AcrobotModel& model, const VnhcSpec& spec,
                            double r0, Chart chart);

/// r after one revolution of the reduced dynamics started at theta = 0.
/// Throws NumericError if the orbit does not return within `horizon` seconds
/// (it escaped the chart, for example).
double poincare_numeric(const AcrobotModel& model, const VnhcSpec& spec,
                        double r0, Chart chart, const IntegratorConfig& cfg,
                        double horizon = 60.0);

}  // namespace giant_swing
