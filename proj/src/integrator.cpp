#include "giant_swing/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace odeint = boost::numeric::odeint;

namespace {

using StateType = std::vector<double>;

constexpr double kRestartGap = 1e-9;
constexpr double kGuardTol = 1e-10;

bool all_finite(const StateType& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

bool direction_matches(Direction d, bool rising) {
  return d == Direction::any || (d == Direction::rising) == rising;
}

}  // namespace

void validate(const IntegratorConfig& cfg) {
  auto in_range = [](double tol) { return tol >= 1e-14 && tol <= 1e-3; };
  if (!in_range(cfg.rel_tol) || !in_range(cfg.abs_tol)) {
    throw DomainError("integrator tolerances must lie in [1e-14, 1e-3]");
  }
  if (!(cfg.max_step > 0.0)) throw DomainError("max_step must be positive");
  if (!std::isfinite(cfg.max_time)) throw DomainError("max_time must be finite");
}

void Trajectory::push_back(double t, std::vector<double> x,
                           std::vector<double> dxdt) {
  times_.push_back(t);
  states_.push_back(std::move(x));
  derivs_.push_back(std::move(dxdt));
}

std::vector<double> Trajectory::at(double t) const {
  if (times_.size() == 1 || t <= times_.front()) return states_.front();
  if (t >= times_.back()) return states_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double h = times_[hi] - times_[lo];
  if (h <= 0.0) return states_[hi];
  const double s = (t - times_[lo]) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  std::vector<double> out(dim());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = h00 * states_[lo][k] + h10 * h * derivs_[lo][k] +
             h01 * states_[hi][k] + h11 * h * derivs_[hi][k];
  }
  return out;
}

void Trajectory::append(const Trajectory& next) {
  std::size_t first = 0;
  if (!empty() && !next.empty() && next.times_.front() <= times_.back()) {
    first = 1;  // shared junction point
  }
  for (std::size_t i = first; i < next.size(); ++i) {
    push_back(next.times_[i], next.states_[i], next.derivs_[i]);
  }
}

IntegrationResult integrate(const VectorField& field, double t0,
                            std::span<const double> x0,
                            const IntegratorConfig& cfg,
                            std::span<const EventSpec> events) {
  validate(cfg);
  const double t_end = cfg.max_time;
  const std::size_t dim = x0.size();

  auto system = [&field](const StateType& x, StateType& dxdt, double t) {
    field(t, x, dxdt);
  };
  auto derivative = [&](double t, const StateType& x) {
    StateType dxdt(dim);
    field(t, x, dxdt);
    return dxdt;
  };

  IntegrationResult result;
  StateType x_start(x0.begin(), x0.end());
  if (!all_finite(x_start)) throw NumericError("non-finite initial state");
  result.trajectory.push_back(t0, x_start, derivative(t0, x_start));

  const bool any_terminal = std::any_of(
      events.begin(), events.end(), [](const EventSpec& e) { return e.terminal; });
  if (t0 >= t_end) {
    result.truncated = any_terminal;
    return result;
  }

  auto stepper = odeint::make_dense_output(
      cfg.abs_tol, cfg.rel_tol, cfg.max_step,
      odeint::runge_kutta_dopri5<StateType>());
  stepper.initialize(x_start, t0, std::min(cfg.max_step, 1e-4));

  std::vector<double> previous_guard(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    previous_guard[i] = events[i].guard(t0, x_start);
  }

  StateType scratch(dim);
  while (true) {
    double t_a = 0.0;
    double t_b = 0.0;
    try {
      std::tie(t_a, t_b) = stepper.do_step(system);
    } catch (const odeint::odeint_error&) {
      throw NumericError(fmt::format(
          "stiffness or singularity encountered at t = {:.17g}",
          stepper.current_time()));
    }
    if (t_b - t_a <= 1e-14 * std::max(1.0, std::abs(t_b))) {
      throw NumericError(
          fmt::format("stiffness or singularity encountered at t = {:.17g}", t_a));
    }
    if (!all_finite(stepper.current_state())) {
      throw NumericError(
          fmt::format("stiffness or singularity encountered at t = {:.17g}", t_a));
    }

    const double t_hi = std::min(t_b, t_end);
    StateType x_hi(dim);
    if (t_hi < t_b) {
      stepper.calc_state(t_hi, x_hi);
    } else {
      x_hi = stepper.current_state();
    }

    auto guard_at = [&](std::size_t i, double t) {
      stepper.calc_state(t, scratch);
      return events[i].guard(t, scratch);
    };

    std::vector<EventHit> hits;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g_a = previous_guard[i];
      const double g_b = events[i].guard(t_hi, x_hi);
      previous_guard[i] = g_b;
      const bool rising = g_a < 0.0 && g_b >= 0.0;
      const bool falling = g_a > 0.0 && g_b <= 0.0;
      if (!(rising || falling) || !direction_matches(events[i].direction, rising)) {
        continue;
      }
      double t_root = t_hi;
      if (g_b != 0.0) {
        std::uintmax_t iterations = 100;
        auto tol = [](double lo, double hi) {
          return std::abs(hi - lo) <= 4e-16 * std::max(1.0, std::abs(hi));
        };
        const auto bracket = boost::math::tools::toms748_solve(
            [&](double t) { return guard_at(i, t); }, t_a, t_hi, g_a, g_b, tol,
            iterations);
        const double g_lo = guard_at(i, bracket.first);
        const double g_hi = guard_at(i, bracket.second);
        t_root = std::abs(g_lo) <= std::abs(g_hi) ? bracket.first : bracket.second;
      }
      if (t_root - t0 < kRestartGap) continue;
      EventHit hit;
      hit.event = i;
      hit.t = t_root;
      hit.state.resize(dim);
      stepper.calc_state(t_root, hit.state);
      hit.guard_value = events[i].guard(t_root, hit.state);
      hit.rising = rising;
      if (std::abs(hit.guard_value) > kGuardTol) {
        // Fall back to plain bisection on the dense output.
        double lo = t_a;
        double hi = t_hi;
        double g_lo = g_a;
        for (int k = 0; k < 200 && std::abs(hit.guard_value) > kGuardTol; ++k) {
          const double mid = 0.5 * (lo + hi);
          const double g_mid = guard_at(i, mid);
          if ((g_mid < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g_mid;
          } else {
            hi = mid;
          }
          hit.t = mid;
          hit.guard_value = g_mid;
          if (hi - lo <= 0.0) break;
        }
        stepper.calc_state(hit.t, hit.state);
      }
      hits.push_back(std::move(hit));
    }
    std::sort(hits.begin(), hits.end(),
              [](const EventHit& a, const EventHit& b) { return a.t < b.t; });

    for (EventHit& hit : hits) {
      const bool terminal = events[hit.event].terminal;
      const double t_hit = hit.t;
      StateType x_hit = hit.state;
      result.events.push_back(std::move(hit));
      if (terminal) {
        result.trajectory.push_back(t_hit, x_hit, derivative(t_hit, x_hit));
        result.terminated = true;
        return result;
      }
    }

    result.trajectory.push_back(t_hi, x_hi, derivative(t_hi, x_hi));
    if (t_b >= t_end) break;
  }
  result.truncated = any_terminal;
  return result;
}

}  // namespace giant_swing
