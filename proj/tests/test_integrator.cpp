#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/errors.hpp"
#include "giant_swing/integrator.hpp"
#include "oracles.hpp"

using namespace giant_swing;

namespace {

const VectorField kHarmonic = [](double, std::span<const double> x,
                                 std::span<double> dx) {
  dx[0] = x[1];
  dx[1] = -x[0];
};

EventSpec zero_of_x(Direction dir, bool terminal) {
  return {"x", [](double, std::span<const double> x) { return x[0]; }, dir, terminal};
}

IntegratorConfig horizon(double t, double tol = 1e-10) {
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = tol;
  cfg.max_time = t;
  return cfg;
}

}  // namespace

TEST(Integrator, HarmonicOscillatorFirstZero) {
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<EventSpec> ev{zero_of_x(Direction::falling, true)};
  const auto run = integrate(kHarmonic, 0.0, x0, horizon(10.0), ev);
  ASSERT_TRUE(run.terminated);
  EXPECT_FALSE(run.truncated);
  ASSERT_EQ(run.events.size(), 1u);
  EXPECT_NEAR(run.events[0].t, kPi / 2, 1e-8);
  EXPECT_NEAR(run.events[0].state[1], -1.0, 1e-8);
  EXPECT_FALSE(run.events[0].rising);
  EXPECT_DOUBLE_EQ(run.trajectory.end_time(), run.events[0].t);
}

TEST(Integrator, DirectionFilter) {
  const std::vector<double> x0{1.0, 0.0};
  const std::vector<EventSpec> ev{zero_of_x(Direction::rising, false)};
  // rising zeros of cos t sit at 3pi/2 and 7pi/2
  const auto run = integrate(kHarmonic, 0.0, x0, horizon(12.0), ev);
  ASSERT_EQ(run.events.size(), 2u);
  EXPECT_NEAR(run.events[0].t, 3 * kPi / 2, 1e-8);
  EXPECT_NEAR(run.events[1].t, 7 * kPi / 2, 1e-8);
  for (const EventHit& h : run.events) {
    EXPECT_TRUE(h.rising);
    EXPECT_LT(std::abs(h.guard_value), 1e-10);
  }
}

TEST(Integrator, TruncatedWhenTerminalEventNeverFires) {
  const std::vector<double> x0{2.0, 0.0};
  const std::vector<EventSpec> ev{
      {"never", [](double, std::span<const double> x) { return x[0] - 5.0; },
       Direction::any, true}};
  const auto run = integrate(kHarmonic, 0.0, x0, horizon(3.0), ev);
  EXPECT_FALSE(run.terminated);
  EXPECT_TRUE(run.truncated);
  EXPECT_DOUBLE_EQ(run.trajectory.end_time(), 3.0);
}

TEST(Integrator, EndpointErrorShrinksWithTolerance) {
  // Local error control at order five: tightening the tolerance 1000x should
  // cut the global error by roughly 1000^(5/5)..1000^(4/5); check it falls
  // by at least two orders and tracks the tolerance.
  const std::vector<double> x0{1.0, 0.0};
  std::vector<double> errors;
  for (double tol : {1e-5, 1e-8, 1e-11}) {
    IntegratorConfig cfg = horizon(20.0, tol);
    cfg.max_step = 10.0;
    const auto run = integrate(kHarmonic, 0.0, x0, cfg);
    const auto& x = run.trajectory.back();
    errors.push_back(std::hypot(x[0] - std::cos(20.0), x[1] + std::sin(20.0)));
  }
  EXPECT_LT(errors[1], errors[0] / 100.0);
  EXPECT_LT(errors[2], errors[1] / 100.0);
  EXPECT_LT(errors[2], 1e-8);
}

TEST(Integrator, AgreesWithFixedStepReference) {
  const oracle::PointMass o;
  const AcrobotModel a(SimplifiedParams{});
  VnhcSpec s;
  s.I = 0.02;
  const auto ref = oracle::rk4<2>(
      [&](double, const std::array<double, 2>& x) {
        return oracle::reduced(o, 1.0, 0.02, x[0], x[1]);
      },
      {0.6, 0.0}, 0.0, 5.0, 20000);
  const std::vector<double> x0{0.6, 0.0};
  const auto run = integrate(reduced_field(a, s), 0.0, x0, horizon(5.0));
  EXPECT_NEAR(run.trajectory.back()[0], ref[0], 1e-7);
  EXPECT_NEAR(run.trajectory.back()[1], ref[1], 1e-7);
}

TEST(Integrator, DenseOutputBetweenSteps) {
  const std::vector<double> x0{1.0, 0.0};
  const auto run = integrate(kHarmonic, 0.0, x0, horizon(6.0));
  for (int i = 0; i <= 600; ++i) {
    const double t = i * 0.01;
    const auto x = run.trajectory.at(t);
    EXPECT_NEAR(x[0], std::cos(t), 1e-6);
    EXPECT_NEAR(x[1], -std::sin(t), 1e-6);
  }
}

TEST(Integrator, RestartFromEventReproducesRemainder) {
  const AcrobotModel a(DistributedParams::rig());
  VnhcSpec s;
  s.I = 10.0;
  const std::vector<double> x0{kPi / 32, 0.0};
  const auto field = reduced_field(a, s);
  const auto ev = section_events();
  // tight tolerance so the two runs' global errors sit well under the comparison bound
  const IntegratorConfig cfg = horizon(12.0, 1e-12);
  const auto whole = integrate(field, 0.0, x0, cfg, ev);
  ASSERT_GE(whole.events.size(), 4u);
  const EventHit& mid = whole.events[3];
  IntegratorConfig rest = cfg;
  const auto tail = integrate(field, mid.t, mid.state, rest, ev);
  // the restart point itself is not reported again
  ASSERT_FALSE(tail.events.empty());
  EXPECT_GT(tail.events.front().t, mid.t + 1e-9);
  EXPECT_NEAR(tail.events.front().t, whole.events[4].t, 1e-8);
  for (int i = 0; i <= 100; ++i) {
    const double t = mid.t + (12.0 - mid.t) * i / 100.0;
    const auto p = whole.trajectory.at(t);
    const auto q = tail.trajectory.at(t);
    EXPECT_NEAR(p[0], q[0], 1e-8);
    EXPECT_NEAR(p[1], q[1], 1e-8);
  }
}

TEST(Integrator, ConservativeReducedEnergyDrift) {
  const AcrobotModel a(DistributedParams::rig());
  VnhcSpec s;
  s.I = 0.0;
  const std::vector<double> x0{kPi / 32, 0.0};
  const auto run = integrate(reduced_field(a, s), 0.0, x0, horizon(30.0));
  const double E0 = nominal_energy(a, {x0[0], x0[1]});
  double drift = 0.0;
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    const auto& x = run.trajectory.state(i);
    drift = std::max(drift, std::abs(nominal_energy(a, {x[0], x[1]}) - E0));
  }
  EXPECT_LT(drift, 1e-8);
}

TEST(Integrator, RotationAxisHitsArePeriodic) {
  const AcrobotModel a(SimplifiedParams{});
  VnhcSpec s;
  s.I = 0.0;
  const std::vector<double> x0{0.0, 30.0};
  const std::vector<EventSpec> ev{
      {"q=0", [](double, std::span<const double> x) { return std::sin(x[0] / 2); },
       Direction::any, false}};
  const auto run = integrate(reduced_field(a, s), 0.0, x0, horizon(20.0), ev);
  ASSERT_GE(run.events.size(), 4u);
  const double period = run.events[1].t - run.events[0].t;
  for (std::size_t i = 2; i < run.events.size(); ++i) {
    EXPECT_NEAR(run.events[i].t - run.events[i - 1].t, period, 1e-6);
  }
}

TEST(Integrator, SingularityReported) {
  const VectorField blowup = [](double, std::span<const double> x, std::span<double> dx) {
    dx[0] = x[0] * x[0];
  };
  const std::vector<double> x0{1.0};
  try {
    integrate(blowup, 0.0, x0, horizon(2.0));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("at t = "), std::string::npos) << e.what();
  }
}

TEST(Integrator, ConfigValidation) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-2;
  EXPECT_THROW(validate(cfg), DomainError);
  cfg = IntegratorConfig{};
  cfg.max_step = 0.0;
  EXPECT_THROW(validate(cfg), DomainError);
  EXPECT_NO_THROW(validate(IntegratorConfig{}));
}

TEST(Trajectory, AppendSkipsJunction) {
  Trajectory a, b;
  a.push_back(0.0, {0.0}, {1.0});
  a.push_back(1.0, {1.0}, {1.0});
  b.push_back(1.0, {1.0}, {1.0});
  b.push_back(2.0, {2.0}, {1.0});
  a.append(b);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_DOUBLE_EQ(a.at(1.5)[0], 1.5);
  EXPECT_DOUBLE_EQ(a.at(5.0)[0], 2.0);
}
