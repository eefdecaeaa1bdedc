#pragma once

// Reference formulas written out by hand for the tests. Nothing here calls
// into the library, so a mistake there cannot cancel against the same
// mistake here.

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

struct PointMass {
  double m = 1.0;
  double l = 1.0;
  double g = 9.81;
};

// M = m l^2 [[3 + 2c, 1 + c], [1 + c, 1]], det = m^2 l^4 (2 - c^2).
inline std::array<double, 4> inverse_inertia(const PointMass& a, double q_a) {
  const double c = std::cos(q_a);
  const double k = 1.0 / (a.m * a.l * a.l * (2.0 - c * c));
  return {k, -(1.0 + c) * k, -(1.0 + c) * k, (3.0 + 2.0 * c) * k};
}

inline double hamiltonian(const PointMass& a, double q_u, double q_a,
                          double p_u, double p_a) {
  const auto Mi = inverse_inertia(a, q_a);
  const double T =
      0.5 * (Mi[0] * p_u * p_u + 2.0 * Mi[1] * p_u * p_a + Mi[3] * p_a * p_a);
  return T - a.m * a.g * a.l * (2.0 * std::cos(q_u) + std::cos(q_u + q_a));
}

// Hamilton's equations; returns (q_u', q_a', p_u', p_a') with torque tau on
// the leg.
inline std::array<double, 4> hamilton(const PointMass& a, double q_u,
                                      double q_a, double p_u, double p_a,
                                      double tau = 0.0) {
  const auto Mi = inverse_inertia(a, q_a);
  const double c = std::cos(q_a);
  const double s = std::sin(q_a);
  const double ml2 = a.m * a.l * a.l;
  // T = N(c) / D(c)
  const double N = p_u * p_u - 2.0 * (1.0 + c) * p_u * p_a + (3.0 + 2.0 * c) * p_a * p_a;
  const double D = 2.0 * ml2 * (2.0 - c * c);
  const double dN = -2.0 * p_u * p_a + 2.0 * p_a * p_a;
  const double dD = -4.0 * ml2 * c;
  const double dT_dqa = (dN * D - N * dD) / (D * D) * (-s);
  const double mgl = a.m * a.g * a.l;
  const double dV_dqu = mgl * (2.0 * std::sin(q_u) + std::sin(q_u + q_a));
  const double dV_dqa = mgl * std::sin(q_u + q_a);
  return {Mi[0] * p_u + Mi[1] * p_a, Mi[2] * p_u + Mi[3] * p_a, -dV_dqu,
          -dT_dqa - dV_dqa + tau};
}

// On q_a = qa_bar atan(I p_u): p_u' does not depend on p_a, so
// q_a' = f'(p_u) p_u' fixes p_a through the second row of M^{-1} p.
inline double completion(const PointMass& a, double qa_bar, double I,
                         double q_u, double p_u) {
  const double q_a = qa_bar * std::atan(I * p_u);
  const double c = std::cos(q_a);
  const double pu_dot =
      -a.m * a.g * a.l * (2.0 * std::sin(q_u) + std::sin(q_u + q_a));
  const double qa_dot = qa_bar * I / (1.0 + I * I * p_u * p_u) * pu_dot;
  return (qa_dot * a.m * a.l * a.l * (2.0 - c * c) + (1.0 + c) * p_u) /
         (3.0 + 2.0 * c);
}

inline std::array<double, 2> reduced(const PointMass& a, double qa_bar,
                                     double I, double q_u, double p_u) {
  const double q_a = qa_bar * std::atan(I * p_u);
  const double p_a = completion(a, qa_bar, I, q_u, p_u);
  const auto f = hamilton(a, q_u, q_a, p_u, p_a);
  return {f[0], f[2]};
}

inline double nominal_energy(const PointMass& a, double q_u, double p_u) {
  return p_u * p_u / (10.0 * a.m * a.l * a.l) +
         3.0 * a.m * a.g * a.l * (1.0 - std::cos(q_u));
}

struct Rig {
  double m_u = 0.2112, m_a = 0.1979;
  double l_u = 0.148, l_a = 0.145;
  double l_cu = 0.073, l_ca = 0.083;
  double J_u = 0.00129, J_a = 0.00075;
  double g = 9.81;

  double m11(double q_a) const {
    return m_a * l_u * l_u + 2.0 * m_a * l_u * l_ca * std::cos(q_a) +
           m_a * l_ca * l_ca + m_u * l_cu * l_cu + J_u + J_a;
  }
  double m12(double q_a) const {
    return m_a * l_ca * l_ca + m_a * l_u * l_ca * std::cos(q_a) + J_a;
  }
  double m22() const { return m_a * l_ca * l_ca + J_a; }
  double potential(double q_u, double q_a) const {
    return g * (m_a * l_ca * (1.0 - std::cos(q_u + q_a)) +
                (m_a * l_u + m_u * l_cu) * (1.0 - std::cos(q_u)));
  }
};

// Classic fixed-step RK4, for cross-checking the adaptive integrator.
template <std::size_t N, class F>
std::array<double, N> rk4(F f, std::array<double, N> x, double t0, double t1,
                          int steps) {
  const double h = (t1 - t0) / steps;
  auto axpy = [](const std::array<double, N>& a, double s,
                 const std::array<double, N>& b) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  double t = t0;
  for (int k = 0; k < steps; ++k) {
    const auto k1 = f(t, x);
    const auto k2 = f(t + h / 2, axpy(x, h / 2, k1));
    const auto k3 = f(t + h / 2, axpy(x, h / 2, k2));
    const auto k4 = f(t + h, axpy(x, h, k3));
    for (std::size_t i = 0; i < N; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    t += h;
  }
  return x;
}

}  // namespace oracle
