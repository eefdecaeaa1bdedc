#include "giant_swing/reduction_transforms.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kEndpointOffset = 1e-10;
constexpr double kSeparatrixMargin = 1e-4;

double wrap_positive(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// sin(r x) / x, continued to r at x = 0.
double sin_ratio(double r, double x) {
  const double rx = r * x;
  if (std::abs(rx) < 1e-4) {
    const double rx2 = rx * rx;
    return r * (1.0 - rx2 / 6.0 + rx2 * rx2 / 120.0);
  }
  return std::sin(rx) / x;
}

// phi / sqrt(K) where p_u = -sin(theta) phi on the oscillation chart. Smooth
// in theta: (cos(r cos t) - cos r) / sin^2 t factors into two sin ratios.
double phi_hat(double r, double theta) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const double prod = sin_ratio(r, c * c) * sin_ratio(r, s * s);
  return std::sqrt(0.5 * std::max(prod, 0.0));
}

// Radius on the oscillation chart; stable near both r = 0 and r = pi.
double osc_radius(double q, double p, double K) {
  const double s = std::sin(0.5 * q);
  const double w = 2.0 * s * s + p * p / K;  // 1 - cos r
  if (w <= 1.0) return 2.0 * std::asin(std::sqrt(0.5 * w));
  return std::acos(std::max(1.0 - w, -1.0));
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

template <class F>
double integrate_periodic_half(F f, double lo, double hi, double abs_tol,
                               const char* what) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          f, lo, hi, 20, 1e-13, &error);
  if (!std::isfinite(value) || error > abs_tol) {
    throw NumericError(fmt::format(
        "{} quadrature did not converge: estimate {:.17g}, error {:.3g}", what,
        value, error));
  }
  return value;
}

}  // namespace

double polar_constant(const AcrobotModel& model) {
  const SimplifiedParams& p = model.simplified();
  return 30.0 * p.m * p.m * p.g * p.l * p.l * p.l;
}

PolarState to_polar_osc(const AcrobotModel& model, ReducedState s) {
  const double K = polar_constant(model);
  const double q = wrap_angle(s.q_u);
  if (classify(model, s, 0.0) != Region::oscillation) {
    throw DomainError("not in oscillation chart");
  }
  const double r = osc_radius(q, s.p_u, K);
  if (!(r > 0.0) || !(r < kPi)) throw DomainError("not in oscillation chart");
  const double x = std::clamp(q / r, -1.0, 1.0);
  const double y = -sign(s.p_u) * std::sqrt(std::max(0.0, 1.0 - x * x));
  return {r, wrap_positive(std::atan2(y, x)), Chart::oscillation};
}

ReducedState from_polar_osc(const AcrobotModel& model, double r, double theta) {
  const double K = polar_constant(model);
  return {r * std::cos(theta),
          -std::sin(theta) * std::sqrt(K) * phi_hat(r, theta)};
}

PolarState to_polar_rot(const AcrobotModel& model, ReducedState s, bool plus) {
  const double K = polar_constant(model);
  if (classify(model, s, 0.0) != Region::rotation ||
      (plus ? !(s.p_u > 0.0) : !(s.p_u < 0.0))) {
    throw DomainError("not in rotation chart");
  }
  const double r = std::sqrt(s.p_u * s.p_u + K * (1.0 - std::cos(s.q_u)));
  const double theta = plus ? s.q_u : -s.q_u;
  return {r, wrap_positive(theta),
          plus ? Chart::rotation_plus : Chart::rotation_minus};
}

ReducedState from_polar_rot(const AcrobotModel& model, double r, double theta,
                            bool plus) {
  const double K = polar_constant(model);
  const double inside = r * r - K * (1.0 - std::cos(theta));
  if (!(inside > 0.0)) throw DomainError("not in rotation chart");
  const double p = std::sqrt(inside);
  return plus ? ReducedState{wrap_angle(theta), p}
              : ReducedState{wrap_angle(-theta), -p};
}

PolarState to_polar(const AcrobotModel& model, ReducedState s, Chart chart) {
  switch (chart) {
    case Chart::oscillation: return to_polar_osc(model, s);
    case Chart::rotation_plus: return to_polar_rot(model, s, true);
    case Chart::rotation_minus: return to_polar_rot(model, s, false);
  }
  throw DomainError("unknown chart");
}

ReducedState from_polar(const AcrobotModel& model, const PolarState& x) {
  if (x.chart == Chart::oscillation) return from_polar_osc(model, x.r, x.theta);
  return from_polar_rot(model, x.r, x.theta, x.chart == Chart::rotation_plus);
}

double f_theta_osc(const AcrobotModel& model, double r, double theta) {
  const SimplifiedParams& p = model.simplified();
  if (!(r > 0.0 && r < kPi)) throw DomainError("r outside ]0, pi[");
  return std::sqrt(6.0 * p.g / (5.0 * p.l)) * phi_hat(r, theta) / r;
}

double f_theta_rot(const AcrobotModel& model, double r, double theta) {
  const SimplifiedParams& p = model.simplified();
  const double inside = r * r - polar_constant(model) * (1.0 - std::cos(theta));
  if (!(inside >= 0.0)) throw DomainError("r below the rotation range");
  return std::sqrt(inside) / (5.0 * p.m * p.l * p.l);
}

Eigen::Vector2d polar_vector_field(const AcrobotModel& model,
                                   const VnhcSpec& spec, const PolarState& x) {
  const double K = polar_constant(model);
  const ReducedState s = from_polar(model, x);
  const Eigen::Vector2d f = reduced_vector_field(model, spec, s);
  const double q_dot = f(0);
  const double p_dot = f(1);

  if (x.chart != Chart::oscillation) {
    const double r_dot =
        (s.p_u * p_dot + 0.5 * K * std::sin(s.q_u) * q_dot) / x.r;
    const double theta_dot = x.chart == Chart::rotation_plus ? q_dot : -q_dot;
    return {r_dot, theta_dot};
  }

  const double r = x.r;
  const double th = x.theta;
  const double r_dot =
      (std::sin(s.q_u) * q_dot + 2.0 * s.p_u * p_dot / K) / std::sin(r);

  // q = r cos(th) and p = -sin(th) phi(r, th) both determine theta_dot; one
  // degenerates where the other does not, so combine them by least squares.
  const double sk = std::sqrt(K);
  const double phi = sk * phi_hat(r, th);
  const double hr = 1e-6 * std::max(1.0, r);
  const double ht = 1e-6;
  const double phi_r =
      sk * (phi_hat(r + hr, th) - phi_hat(r - hr, th)) / (2.0 * hr);
  const double phi_t =
      sk * (phi_hat(r, th + ht) - phi_hat(r, th - ht)) / (2.0 * ht);
  const double st = std::sin(th);
  const double ct = std::cos(th);
  const double a1 = r * st;
  const double b1 = ct * r_dot - q_dot;
  const double a2 = -(ct * phi + st * phi_t);
  const double b2 = p_dot + st * phi_r * r_dot;
  const double theta_dot = (a1 * b1 + a2 * b2) / (a1 * a1 + a2 * a2);
  return {r_dot, theta_dot};
}

double polar_slope(const AcrobotModel& model, const VnhcSpec& spec,
                   const PolarState& x) {
  const Eigen::Vector2d f = polar_vector_field(model, spec, x);
  return f(0) / f(1);
}

double gain_scale(const AcrobotModel& model, const VnhcSpec& spec) {
  return spec.qa_bar * std::sqrt(polar_constant(model)) / 15.0;
}

double integrand_a(double r, double theta) {
  if (!(r > 0.0 && r < kPi)) throw DomainError("r outside ]0, pi[");
  const double c = std::cos(r * std::cos(theta));
  const double num = 5.0 * std::cos(r) * c - 8.0 * c * c + 3.0;
  return r * num / (std::sin(r) * phi_hat(r, theta));
}

double osc_gain_integral(double r) {
  if (!(r > 0.0 && r < kPi)) throw DomainError("r outside ]0, pi[");
  // a depends on theta through cos(theta) and |sin(theta)|, so the second
  // half-revolution repeats the first.
  auto f = [r](double th) { return integrand_a(r, th); };
  return 2.0 * integrate_periodic_half(f, kEndpointOffset, kPi - kEndpointOffset,
                                       1e-9, "oscillation gain");
}

double integrand_b(const AcrobotModel& model, const VnhcSpec& spec, double r,
                   double theta) {
  const SimplifiedParams& p = model.simplified();
  const double K = polar_constant(model);
  const double C = p.m * p.m * p.g * p.l * p.l * p.l * spec.qa_bar;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double inside = r * r - K * (1.0 - c);
  if (!(inside > 0.0)) throw DomainError("r below the rotation range");
  return 5.0 * C * ((C / spec.qa_bar) * (18.0 * s * s + 30.0 * c * (1.0 - c)) -
                    c * r * r) /
         (std::abs(r) * std::sqrt(inside));
}

double rotation_gain_integral(const AcrobotModel& model, const VnhcSpec& spec,
                              double r) {
  const double boundary = std::sqrt(2.0 * polar_constant(model));
  if (!(r > boundary + kSeparatrixMargin)) {
    throw DomainError(fmt::format(
        "r = {:.17g} is within {} of the separatrix at {:.17g}", r,
        kSeparatrixMargin, boundary));
  }
  auto f = [&](double th) { return integrand_b(model, spec, r, th); };
  return 2.0 * integrate_periodic_half(f, 0.0, kPi, 1e-8, "rotation gain");
}

double poincare_first_order(const AcrobotModel& model, const VnhcSpec& spec,
                            double r0, Chart chart) {
  if (spec.I == 0.0) return r0;
  if (chart == Chart::oscillation) {
    return r0 + spec.I * gain_scale(model, spec) * osc_gain_integral(r0);
  }
  return r0 + spec.I * rotation_gain_integral(model, spec, r0);
}

double poincare_numeric(const AcrobotModel& model, const VnhcSpec& spec,
                        double r0, Chart chart, const IntegratorConfig& cfg,
                        double horizon) {
  const double K = polar_constant(model);
  const ReducedState start = from_polar(model, {r0, 0.0, chart});
  const StateLayout layout = StateLayout::reduced();
  std::vector<EventSpec> events(1);
  if (chart == Chart::oscillation) {
    events[0] = {"return",
                 [layout](double, std::span<const double> x) {
                   return q_axis_guard(x, layout);
                 },
                 Direction::falling, true};
  } else {
    events[0] = {"return",
                 [layout](double, std::span<const double> x) {
                   return p_axis_guard(x, layout);
                 },
                 Direction::any, true};
  }
  IntegratorConfig run_cfg = cfg;
  run_cfg.max_time = horizon;
  const double x0[2] = {start.q_u, start.p_u};
  const IntegrationResult run =
      integrate(reduced_field(model, spec), 0.0, x0, run_cfg, events);
  if (!run.terminated) {
    throw NumericError("orbit did not return to the section");
  }
  const std::vector<double>& x = run.events.back().state;
  if (chart == Chart::oscillation) {
    if (!(x[0] > 0.0)) throw NumericError("orbit left the oscillation chart");
    return osc_radius(x[0], x[1], K);
  }
  return std::sqrt(x[1] * x[1] + K * (1.0 - std::cos(x[0])));
}

}  // namespace giant_swing
