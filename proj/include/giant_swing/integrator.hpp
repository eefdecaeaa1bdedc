#pragma once

// Adaptive Dormand-Prince 5(4) integration with dense output and event
// location. Angles are integrated unwrapped; guards see the raw state.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace giant_swing {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.05;  // s
  double max_time = 10.0;  // s, end of the integration horizon
};

/// Throws DomainError when tolerances leave [1e-14, 1e-3] or max_step <= 0.
void validate(const IntegratorConfig& cfg);

using VectorField =
    std::function<void(double t, std::span<const double> x, std::span<double> dxdt)>;

enum class Direction { rising, falling, any };

struct EventSpec {
  std::string name;
  std::function<double(double t, std::span<const double> x)> guard;
  Direction direction = Direction::any;
  bool terminal = false;
};

struct EventHit {
  std::size_t event = 0;  // index into the event list
  double t = 0.0;
  std::vector<double> state;
  double guard_value = 0.0;
  bool rising = false;
};

/// Accepted step points with derivatives; evaluates between them by cubic
/// Hermite interpolation.
class Trajectory {
 public:
  void push_back(double t, std::vector<double> x, std::vector<double> dxdt);

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  std::size_t dim() const { return states_.empty() ? 0 : states_.front().size(); }

  double time(std::size_t i) const { return times_[i]; }
  const std::vector<double>& state(std::size_t i) const { return states_[i]; }
  const std::vector<double>& derivative(std::size_t i) const { return derivs_[i]; }
  const std::vector<double>& times() const { return times_; }

  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  const std::vector<double>& back() const { return states_.back(); }

  /// Interpolated state; t is clamped to [start_time, end_time].
  std::vector<double> at(double t) const;

  /// Appends another trajectory that starts where this one ends.
  void append(const Trajectory& next);

 private:
  std::vector<double> times_;
  std::vector<std::vector<double>> states_;
  std::vector<std::vector<double>> derivs_;
};

struct IntegrationResult {
  Trajectory trajectory;
  std::vector<EventHit> events;  // in time order
  bool terminated = false;       // stopped at a terminal event
  bool truncated = false;        // reached max_time while a terminal event was armed
};

/// Integrates x' = field(t, x) from (t0, x0) until cfg.max_time or the first
/// terminal event. Events are located on the dense output to |guard| < 1e-10.
/// Roots within 1e-9 s of t0 are ignored so that a run restarted from an
/// event point does not report it again.
///
/// Throws NumericError on step-size underflow ("stiffness or singularity
/// encountered at t = ...") or a non-finite state.
IntegrationResult integrate(const VectorField& field, double t0,
                            std::span<const double> x0,
                            const IntegratorConfig& cfg,
                            std::span<const EventSpec> events = {});

}  // namespace giant_swing
