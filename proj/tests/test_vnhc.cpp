#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "giant_swing/energy_analysis.hpp"
#include "giant_swing/errors.hpp"
#include "giant_swing/integrator.hpp"
#include "giant_swing/vnhc.hpp"
#include "oracles.hpp"

using namespace giant_swing;

namespace {

FullState full(double qu, double qa, double pu, double pa) {
  FullState x;
  x.q = Vector(2);
  x.p = Vector(2);
  x.q << qu, qa;
  x.p << pu, pa;
  return x;
}

FullState from_vector(std::span<const double> v) {
  return full(v[0], v[1], v[2], v[3]);
}

VnhcSpec spec_with(double I, double qa_bar = 1.0) {
  VnhcSpec s;
  s.qa_bar = qa_bar;
  s.I = I;
  return s;
}

}  // namespace

TEST(Constraint, Values) {
  EXPECT_DOUBLE_EQ(constraint_f(spec_with(10.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(constraint_f(spec_with(0.0), 3.7), 0.0);
  EXPECT_NEAR(constraint_f(spec_with(10.0), 0.1), kPi / 4, 1e-15);
  EXPECT_NEAR(constraint_slope(spec_with(10.0), 0.1), 10.0 / 2.0, 1e-14);
}

TEST(Constraint, SpecValidation) {
  EXPECT_NO_THROW(validate(spec_with(10.0, 1.0)));
  EXPECT_THROW(validate(spec_with(1.0, 0.0)), DomainError);
  EXPECT_THROW(validate(spec_with(1.0, 1.5)), DomainError);
  VnhcSpec s = spec_with(1.0);
  s.k_d = 0.0;
  EXPECT_THROW(validate(s), DomainError);
  EXPECT_THROW(validate(spec_with(std::numeric_limits<double>::infinity())), DomainError);
}

TEST(Decoupling, ClosedFormValues) {
  EXPECT_NEAR(decoupling_scalar_closed_form({}, 0.0), 5.0, 1e-15);
  EXPECT_NEAR(decoupling_scalar_closed_form({}, kPi / 2), 1.5, 1e-15);
  EXPECT_NEAR(decoupling_scalar_closed_form({2.0, 0.5, 9.81}, kPi / 2), 3.0 / (2.0 * 0.5), 1e-14);
}

TEST(Decoupling, GenericMatchesClosedForm) {
  const AcrobotModel a(SimplifiedParams{});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (double I : {-10.0, 0.0, 0.3, 10.0}) {
    const Constraint h = arctan_constraint(spec_with(I));
    for (int i = 0; i < 200; ++i) {
      const FullState x = full(U(rng), U(rng), U(rng), U(rng));
      EXPECT_NEAR(decoupling_scalar(a.system(), h, x),
                  decoupling_scalar_closed_form({}, x.q(1)), 1e-10);
    }
  }
}

TEST(Decoupling, SingularConstraintIsRejected) {
  const AcrobotModel a(SimplifiedParams{});
  const Constraint bad = [](const FullState& x) {
    const double c = std::cos(x.q(1));
    return ConstraintJet{0.0, -(3.0 + 2.0 * c) / (1.0 + c), 0.0};
  };
  const FullState x = full(0.2, 0.4, 0.1, 0.0);
  try {
    decoupling_scalar(a.system(), bad, x);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_STREQ(e.what(), "constraint not regular here");
  }
  const RegularityReport rep = regularity_check(a.system(), bad, {x});
  EXPECT_FALSE(rep.regular);
  EXPECT_LT(rep.min_abs_decoupling, 1e-9);
}

TEST(Decoupling, RegularOverLegGrid) {
  for (const AcrobotModel& a :
       {AcrobotModel(SimplifiedParams{}), AcrobotModel(DistributedParams::rig())}) {
    for (double I : {-10.0, 0.0, 10.0}) {
      const auto grid = leg_angle_grid(720);
      ASSERT_EQ(grid.size(), 720u);
      const RegularityReport rep =
          regularity_check(a.system(), arctan_constraint(spec_with(I)), grid);
      EXPECT_TRUE(rep.regular) << a.name() << " I=" << I;
      EXPECT_TRUE(rep.independent_of_pa);
      EXPECT_GT(rep.min_abs_decoupling, 0.0);
      if (a.is_simplified()) {
        // (3 + 2c) / (2 - c^2) is smallest at c = -1, where it is 1
        EXPECT_NEAR(rep.min_abs_decoupling, 1.0, 1e-12);
        EXPECT_NEAR(std::abs(rep.argmin.q(1)), kPi, 1e-12);
      }
    }
  }
}

TEST(Decoupling, RelativeDegreeOne) {
  const AcrobotModel a(DistributedParams::rig());
  const MechanicalSystem& sys = a.system();
  const Constraint h = arctan_constraint(spec_with(10.0));
  const FullState x = full(0.4, 0.3, 0.05, -0.01);
  auto e_dot = [&](const FullState& s) { return constraint_error(sys, h, s).e_dot; };
  // e_ddot along the field with torque tau, by a directional difference
  auto e_ddot = [&](double tau) {
    Vector t(1);
    t << tau;
    const Vector f = full_vector_field(sys, x, t);
    const double eps = 1e-6;
    FullState plus = x, minus = x;
    plus.q += eps * f.head(2);
    plus.p += eps * f.tail(2);
    minus.q -= eps * f.head(2);
    minus.p -= eps * f.tail(2);
    return (e_dot(plus) - e_dot(minus)) / (2 * eps);
  };
  const double H = decoupling_scalar(sys, h, x);
  EXPECT_NEAR(e_ddot(1.0) - e_ddot(0.0), H, 1e-6 * std::max(1.0, std::abs(H)));
  EXPECT_NEAR(e_ddot(0.0), constraint_drift(sys, h, x), 1e-5 * std::max(1.0, std::abs(H)));
}

TEST(MomentumCompletion, ZeroGainRigidBody) {
  const AcrobotModel a(SimplifiedParams{});
  for (double pu : {-2.0, 0.5, 3.0}) {
    EXPECT_NEAR(momentum_completion_g(a, spec_with(0.0), {1.2, pu}), 2.0 * pu / 5.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(momentum_completion_g(a, spec_with(10.0), {0.0, 0.0}), 0.0);
}

TEST(MomentumCompletion, GenericClosedFormAndOracleAgree) {
  const SimplifiedParams p{1.3, 0.8, 9.81};
  const AcrobotModel a(p);
  const oracle::PointMass o{1.3, 0.8, 9.81};
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> Q(-kPi, kPi), P(-6.0, 6.0), G(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const VnhcSpec s = spec_with(G(rng));
    const ReducedState r{Q(rng), P(rng)};
    const double generic = momentum_completion_g(a.system(), arctan_constraint(s), r);
    const double closed = momentum_completion_g_closed_form(p, s, r);
    const double hand = oracle::completion(o, s.qa_bar, s.I, r.q_u, r.p_u);
    EXPECT_NEAR(generic, closed, 1e-9 * std::max(1.0, std::abs(closed)));
    EXPECT_NEAR(closed, hand, 1e-9 * std::max(1.0, std::abs(hand)));
  }
}

TEST(ReducedField, GenericClosedFormAndOracleAgree) {
  const SimplifiedParams p{};
  const AcrobotModel a(p);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> Q(-kPi, kPi), P(-25.0, 25.0), G(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const VnhcSpec s = spec_with(G(rng));
    const ReducedState r{Q(rng), P(rng)};
    const Eigen::Vector2d generic = reduced_vector_field(a.system(), arctan_constraint(s), r);
    const Eigen::Vector2d closed = reduced_vector_field_closed_form(p, s, r);
    const auto hand = oracle::reduced({}, s.qa_bar, s.I, r.q_u, r.p_u);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(generic(k), closed(k), 1e-9 * std::max(1.0, std::abs(closed(k))));
      EXPECT_NEAR(closed(k), hand[k], 1e-9 * std::max(1.0, std::abs(hand[k])));
    }
  }
}

TEST(ReducedField, EquilibriumAndOddness) {
  for (const AcrobotModel& a :
       {AcrobotModel(SimplifiedParams{}), AcrobotModel(DistributedParams::rig())}) {
    EXPECT_LT(reduced_vector_field(a, spec_with(10.0), {0, 0}).cwiseAbs().maxCoeff(), 1e-15);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> Q(-kPi, kPi), P(-1.0, 1.0);
    const double pscale = a.is_simplified() ? 20.0 : 0.2;
    for (double I : {-10.0, 10.0}) {
      for (int i = 0; i < 100; ++i) {
        const ReducedState s{Q(rng), pscale * P(rng)};
        const Eigen::Vector2d f = reduced_vector_field(a, spec_with(I), s);
        const Eigen::Vector2d g = reduced_vector_field(a, spec_with(I), {-s.q_u, -s.p_u});
        EXPECT_NEAR(f(0), -g(0), 1e-12 * std::max(1.0, std::abs(f(0))));
        EXPECT_NEAR(f(1), -g(1), 1e-12 * std::max(1.0, std::abs(f(1))));
      }
    }
  }
}

TEST(Enforcement, RestAtBottomNeedsNoTorque) {
  const AcrobotModel a(SimplifiedParams{});
  EXPECT_NEAR(enforcement_torque(a, spec_with(0.0), full(0, 0, 0, 0)), 0.0, 1e-12);
}

TEST(Enforcement, LiftIsOnManifold) {
  const AcrobotModel a(DistributedParams::rig());
  const VnhcSpec s = spec_with(10.0);
  const FullState x = lift_to_manifold(a, s, {0.5, 0.07});
  const ConstraintError err = constraint_error(a.system(), arctan_constraint(s), x);
  EXPECT_NEAR(err.e, 0.0, 1e-14);
  EXPECT_NEAR(err.e_dot, 0.0, 1e-12);
  EXPECT_NEAR(x.p(1), momentum_completion_g(a, s, {0.5, 0.07}), 1e-15);
}

TEST(Enforcement, OnManifoldErrorAccelerationVanishes) {
  const AcrobotModel a(SimplifiedParams{});
  const VnhcSpec s = spec_with(0.2);
  const Constraint h = arctan_constraint(s);
  const FullState x = lift_to_manifold(a, s, {0.8, 3.0});
  const Vector f = closed_loop_vector_field(a, s, x);
  const double eps = 1e-6;
  FullState plus = x, minus = x;
  plus.q += eps * f.head(2);
  plus.p += eps * f.tail(2);
  minus.q -= eps * f.head(2);
  minus.p -= eps * f.tail(2);
  const double e_ddot = (constraint_error(a.system(), h, plus).e_dot -
                         constraint_error(a.system(), h, minus).e_dot) / (2 * eps);
  EXPECT_NEAR(e_ddot, 0.0, 1e-6);
}

TEST(Enforcement, ErrorFollowsCriticallyDampedSolution) {
  const AcrobotModel a(SimplifiedParams{});
  const VnhcSpec s = spec_with(0.05);
  const Constraint h = arctan_constraint(s);
  const FullState x0 = lift_to_manifold(a.system(), h, {0.4, 1.0}, 0.1, 0.0);
  const ConstraintError err0 = constraint_error(a.system(), h, x0);
  ASSERT_NEAR(err0.e, 0.1, 1e-14);
  ASSERT_NEAR(err0.e_dot, 0.0, 1e-12);
  const std::vector<double> v0{x0.q(0), x0.q(1), x0.p(0), x0.p(1)};
  IntegratorConfig cfg;
  cfg.max_time = 1.0;
  const auto run = integrate(closed_loop_field(a, s), 0.0, v0, cfg);
  for (int i = 0; i <= 100; ++i) {
    const double t = i / 100.0;
    const double e = constraint_error(a.system(), h, from_vector(run.trajectory.at(t))).e;
    const double expect = 0.1 * (1.0 + 10.0 * t) * std::exp(-10.0 * t);
    EXPECT_NEAR(e, expect, 0.02 * 0.1) << "t = " << t;
  }
}

TEST(Enforcement, ManifoldIsInvariant) {
  const AcrobotModel a(DistributedParams::rig());
  const VnhcSpec s = spec_with(10.0);
  const Constraint h = arctan_constraint(s);
  const FullState x0 = lift_to_manifold(a, s, {kPi / 32, 0.0});
  const std::vector<double> v0{x0.q(0), x0.q(1), x0.p(0), x0.p(1)};
  IntegratorConfig cfg;
  cfg.max_time = 30.0;
  const auto run = integrate(closed_loop_field(a, s), 0.0, v0, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    const ConstraintError err =
        constraint_error(a.system(), h, from_vector(run.trajectory.state(i)));
    worst = std::max({worst, std::abs(err.e), std::abs(err.e_dot)});
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Reduction, FullMatchesReduced) {
  struct Case {
    AcrobotModel model;
    double I;
    ReducedState x0;
  };
  const std::vector<Case> cases = {
      {AcrobotModel(SimplifiedParams{}), 0.01, {0.5, 0.0}},
      {AcrobotModel(DistributedParams::rig()), 10.0, {kPi / 32, 0.0}},
  };
  for (const Case& c : cases) {
    const VnhcSpec s = spec_with(c.I);
    IntegratorConfig cfg;
    const SimulationRun red = simulate_reduced(c.model, s, c.x0, 10.0, cfg);
    const FullState lifted = lift_to_manifold(c.model, s, c.x0);
    const SimulationRun full_run = simulate_full(c.model, s, lifted, 10.0, cfg);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double t = 10.0 * i / 2000.0;
      const auto r = red.result.trajectory.at(t);
      const auto f = full_run.result.trajectory.at(t);
      worst = std::max({worst, std::abs(r[0] - f[0]), std::abs(r[1] - f[2])});
    }
    EXPECT_LT(worst, 1e-4) << c.model.name();
  }
}

TEST(Reduction, ZeroGainConservesNominalEnergy) {
  const AcrobotModel a(DistributedParams::rig());
  IntegratorConfig cfg;
  const SimulationRun run = simulate_reduced(a, spec_with(0.0), {1.0, 0.0}, 30.0, cfg);
  const double E0 = nominal_energy(a, {1.0, 0.0});
  for (std::size_t i = 0; i < run.result.trajectory.size(); ++i) {
    const auto& x = run.result.trajectory.state(i);
    EXPECT_NEAR(nominal_energy(a, {x[0], x[1]}), E0, 1e-6);
  }
}
