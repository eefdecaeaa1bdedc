#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/errors.hpp"
#include "giant_swing/reduction_transforms.hpp"
#include "oracles.hpp"

using namespace giant_swing;

namespace {

const AcrobotModel& desk() {
  static const AcrobotModel a(SimplifiedParams{});
  return a;
}

VnhcSpec gain(double I, double qa_bar = 1.0) {
  VnhcSpec s;
  s.I = I;
  s.qa_bar = qa_bar;
  return s;
}

constexpr double kK = 30.0 * 9.81;

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-13;
  cfg.max_step = 0.02;
  return cfg;
}

}  // namespace

TEST(Polar, ConstantAndScale) {
  EXPECT_NEAR(polar_constant(desk()), 294.3, 1e-12);
  EXPECT_NEAR(gain_scale(desk(), gain(1.0)), std::sqrt(294.3) / 15.0, 1e-14);
  EXPECT_THROW(polar_constant(AcrobotModel(DistributedParams::rig())), DomainError);
}

TEST(Polar, OscillationSimplePoints) {
  const PolarState s = to_polar_osc(desk(), {0.7, 0.0});
  EXPECT_NEAR(s.r, 0.7, 1e-14);
  EXPECT_NEAR(s.theta, 0.0, 1e-14);
  const ReducedState back = from_polar_osc(desk(), 0.7, kPi);
  EXPECT_NEAR(back.q_u, -0.7, 1e-14);
  EXPECT_NEAR(back.p_u, 0.0, 1e-7);
}

TEST(Polar, OscillationMatchesClosedForm) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> R(0.05, 3.0), T(0.0, 2 * kPi);
  for (int i = 0; i < 1000; ++i) {
    const double r = R(rng), th = T(rng);
    const ReducedState s = from_polar_osc(desk(), r, th);
    const double sgn = std::sin(th) > 0 ? 1.0 : -1.0;
    EXPECT_NEAR(s.q_u, r * std::cos(th), 1e-12);
    EXPECT_NEAR(s.p_u,
                -sgn * std::sqrt(kK * (std::cos(r * std::cos(th)) - std::cos(r))),
                1e-9);
    // level: cos q - p^2 / K = cos r
    EXPECT_NEAR(std::cos(s.q_u) - s.p_u * s.p_u / kK, std::cos(r), 1e-12);
  }
}

TEST(Polar, OscillationRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> Q(-3.0, 3.0), P(-24.0, 24.0);
  int tested = 0;
  while (tested < 1000) {
    const ReducedState s{Q(rng), P(rng)};
    if (classify(desk(), s) != Region::oscillation) continue;
    ++tested;
    const PolarState x = to_polar_osc(desk(), s);
    EXPECT_GE(x.theta, 0.0);
    EXPECT_LT(x.theta, 2 * kPi);
    const ReducedState b = from_polar_osc(desk(), x.r, x.theta);
    EXPECT_LT(std::hypot(b.q_u - s.q_u, b.p_u - s.p_u), 1e-9);
  }
}

TEST(Polar, OscillationDomain) {
  EXPECT_THROW(to_polar_osc(desk(), {0.0, 30.0}), DomainError);
  try {
    to_polar_osc(desk(), {0.0, 0.0});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "not in oscillation chart");
  }
}

TEST(Polar, RotationCharts) {
  const PolarState s = to_polar_rot(desk(), {0.0, 30.0}, true);
  EXPECT_NEAR(s.r, 30.0, 1e-13);
  EXPECT_NEAR(s.theta, 0.0, 1e-15);
  EXPECT_THROW(to_polar_rot(desk(), {0.0, 30.0}, false), DomainError);
  EXPECT_THROW(to_polar_rot(desk(), {0.0, 5.0}, true), DomainError);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> Q(-3.1, 3.1), P(25.0, 60.0);
  for (int i = 0; i < 1000; ++i) {
    const bool plus = i % 2 == 0;
    const ReducedState st{Q(rng), plus ? P(rng) : -P(rng)};
    const PolarState x = to_polar_rot(desk(), st, plus);
    EXPECT_NEAR(x.r, std::sqrt(st.p_u * st.p_u + kK * (1 - std::cos(st.q_u))), 1e-12);
    const ReducedState b = from_polar_rot(desk(), x.r, x.theta, plus);
    EXPECT_LT(std::hypot(wrap_angle(b.q_u - st.q_u), b.p_u - st.p_u), 1e-9);
  }
}

TEST(Polar, LevelSetsAreCircles) {
  const VnhcSpec s = gain(0.0);
  IntegratorConfig cfg;
  {
    const SimulationRun run = simulate_reduced(desk(), s, {1.3, 2.0}, 10.0, cfg);
    const double r0 = to_polar_osc(desk(), {1.3, 2.0}).r;
    for (std::size_t i = 0; i < run.result.trajectory.size(); ++i) {
      const auto& x = run.result.trajectory.state(i);
      EXPECT_NEAR(to_polar_osc(desk(), {x[0], x[1]}).r, r0, 1e-6);
    }
  }
  {
    const SimulationRun run = simulate_reduced(desk(), s, {0.0, 40.0}, 10.0, cfg);
    for (std::size_t i = 0; i < run.result.trajectory.size(); ++i) {
      const auto& x = run.result.trajectory.state(i);
      EXPECT_NEAR(to_polar_rot(desk(), {x[0], x[1]}, true).r, 40.0, 1e-6);
    }
  }
}

TEST(AngularSpeed, OscillationLimitAndContinuity) {
  for (double r : {0.1, 1.0, 2.5, 3.1}) {
    const double limit = std::sqrt(6.0 * 9.81 * std::sin(r) / (10.0 * r));
    EXPECT_NEAR(f_theta_osc(desk(), r, 0.0), limit, 1e-12);
    EXPECT_LT(std::abs(f_theta_osc(desk(), r, 1e-6) - limit), 1e-5);
    // away from the axis: sqrt(6g/5l) sqrt((cos(r c) - cos r) / (r^2 s^2))
    const double th = 1.1;
    const double expect = std::sqrt(6.0 * 9.81 / 5.0) *
        std::sqrt((std::cos(r * std::cos(th)) - std::cos(r)) /
                  (r * r * std::sin(th) * std::sin(th)));
    EXPECT_NEAR(f_theta_osc(desk(), r, th), expect, 1e-12);
  }
}

TEST(AngularSpeed, PositiveOnGrids) {
  for (int i = 1; i <= 100; ++i) {
    const double r = kPi * i / 101.0;
    for (int j = 0; j < 100; ++j) {
      EXPECT_GT(f_theta_osc(desk(), r, 2 * kPi * j / 100.0), 0.0);
    }
  }
  const double rb = std::sqrt(2 * kK);
  for (double r : {rb + 1e-3, 30.0, 60.0}) {
    for (int j = 0; j < 100; ++j) {
      EXPECT_GT(f_theta_rot(desk(), r, 2 * kPi * j / 100.0), 0.0);
    }
  }
  EXPECT_NEAR(f_theta_rot(desk(), 30.0, 0.0), 30.0 / 5.0, 1e-14);
  EXPECT_LT(f_theta_rot(desk(), rb + 1e-8, kPi), 1e-3);
  EXPECT_THROW(f_theta_rot(desk(), rb - 1.0, kPi), DomainError);
}

TEST(GainIntegrand, FiniteNearAxis) {
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    EXPECT_LT(std::abs(integrand_a(r, 1e-6) - integrand_a(r, 1e-7)), 1e-4);
    EXPECT_LT(std::abs(integrand_a(r, kPi - 1e-6) - integrand_a(r, kPi - 1e-7)), 1e-4);
    EXPECT_TRUE(std::isfinite(integrand_a(r, 0.0)));
  }
}

TEST(GainIntegrand, MatchesDerivativeOfSlope) {
  const double h = 1e-6;
  for (double qa_bar : {1.0, 0.6}) {
    const double L = gain_scale(desk(), gain(h, qa_bar));
    for (double r : {0.3, 1.0, 2.2}) {
      for (int j = 0; j < 24; ++j) {
        const double th = 2 * kPi * (j + 0.25) / 24.0;
        const PolarState x{r, th, Chart::oscillation};
        const double g0 = polar_slope(desk(), gain(0.0, qa_bar), x);
        const double dg = (polar_slope(desk(), gain(h, qa_bar), x) - g0) / h;
        EXPECT_NEAR(dg, L * integrand_a(r, th), 1e-4 * std::max(1.0, std::abs(dg)))
            << "r=" << r << " th=" << th;
      }
    }
  }
}

TEST(GainIntegrand, RotationMatchesDerivativeOfSlope) {
  const double h = 1e-6;
  for (double r : {25.0, 40.0}) {
    for (int j = 0; j < 24; ++j) {
      const double th = 2 * kPi * (j + 0.25) / 24.0;
      const PolarState x{r, th, Chart::rotation_plus};
      // central: the I^2 term scales with p^2 and is large out here
      const double dg = (polar_slope(desk(), gain(h), x) -
                         polar_slope(desk(), gain(-h), x)) / (2 * h);
      EXPECT_NEAR(dg, integrand_b(desk(), gain(h), r, th),
                  1e-4 * std::max(1.0, std::abs(dg)));
    }
  }
  const double C = 9.81;  // m^2 g l^3 qa_bar
  const double r = 30.0;
  EXPECT_NEAR(integrand_b(desk(), gain(1.0), r, kPi / 2),
              5.0 * C * (18.0 * C) / (r * std::sqrt(r * r - kK)), 1e-12);
}

TEST(GainIntegrand, UnperturbedRadiusIsStationary) {
  for (double r : {0.4, 1.5, 2.8}) {
    for (int j = 0; j < 16; ++j) {
      const double th = 2 * kPi * (j + 0.5) / 16.0;
      const PolarState x{r, th, Chart::oscillation};
      EXPECT_LT(std::abs(polar_vector_field(desk(), gain(0.0), x)(0)), 1e-8);
      const double dr = 1e-4;
      const double d = (polar_slope(desk(), gain(0.0), {r + dr, th, Chart::oscillation}) -
                        polar_slope(desk(), gain(0.0), {r - dr, th, Chart::oscillation})) /
                       (2 * dr);
      EXPECT_LT(std::abs(d), 1e-6);
    }
  }
  for (int j = 0; j < 16; ++j) {
    const PolarState x{35.0, 2 * kPi * j / 16.0, Chart::rotation_minus};
    EXPECT_LT(std::abs(polar_vector_field(desk(), gain(0.0), x)(0)), 1e-8);
  }
}

TEST(GainIntegral, PositiveOnGrid) {
  for (int i = 1; i <= 31; ++i) {
    EXPECT_GT(osc_gain_integral(0.1 * i), 0.0) << "r = " << 0.1 * i;
  }
  EXPECT_THROW(osc_gain_integral(kPi), DomainError);
}

TEST(GainIntegral, RotationPositiveAboveSeparatrix) {
  double eps = std::numeric_limits<double>::infinity();
  for (double r : {25.0, 30.0, 40.0, 60.0}) {
    eps = std::min(eps, rotation_gain_integral(desk(), gain(1.0), r));
  }
  EXPECT_GT(eps, 0.0);
  EXPECT_THROW(rotation_gain_integral(desk(), gain(1.0), std::sqrt(2 * kK) + 1e-5),
               DomainError);
}

TEST(ReturnMap, ZeroGainIsIdentity) {
  for (double r : {0.5, 1.0, 2.5}) {
    EXPECT_NEAR(poincare_numeric(desk(), gain(0.0), r, Chart::oscillation, tight()), r, 1e-8);
    EXPECT_DOUBLE_EQ(poincare_first_order(desk(), gain(0.0), r, Chart::oscillation), r);
  }
  EXPECT_NEAR(poincare_numeric(desk(), gain(0.0), 30.0, Chart::rotation_plus, tight()), 30.0,
              1e-8);
}

TEST(ReturnMap, FirstOrderIsOddInGain) {
  for (double r : {0.7, 2.0}) {
    const double up = poincare_first_order(desk(), gain(1e-3), r, Chart::oscillation) - r;
    const double down = poincare_first_order(desk(), gain(-1e-3), r, Chart::oscillation) - r;
    EXPECT_NEAR(up, -down, 1e-15);
  }
}

TEST(ReturnMap, RemainderIsSecondOrder) {
  const double r = 1.0;
  auto residual = [&](double I) {
    return poincare_numeric(desk(), gain(I), r, Chart::oscillation, tight()) -
           poincare_first_order(desk(), gain(I), r, Chart::oscillation);
  };
  const double ratio = residual(2e-3) / residual(1e-3);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(ReturnMap, GainingOrbitsStepOutward) {
  double gamma = std::numeric_limits<double>::infinity();
  for (double r : {0.5, 1.0, 1.5, 2.0, 2.5}) {
    gamma = std::min(gamma,
                     poincare_numeric(desk(), gain(0.01), r, Chart::oscillation, tight()) - r);
  }
  EXPECT_GT(gamma, 0.0);
}
