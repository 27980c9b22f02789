#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace quadnet {

enum class Method { euler, rk4 };

Method parse_method(std::string_view name);

enum class StopMetric { gen_loss, train_loss };

/// Step size, budget and recording policy shared by every integrator.
struct IntegratorConfig {
  double step = 0.003;
  std::int64_t max_steps = 1000;
  std::int64_t record_every = 1;
  std::optional<double> stop_threshold;
  StopMetric stop_on = StopMetric::gen_loss;
  Method method = Method::euler;
  bool keep_snapshots = false;

  /// Throws std::invalid_argument on step <= 0, max_steps < 1 or record_every < 1.
  void validate() const;
};

enum class FlowStatus {
  completed,            // ran the full budget
  stopped,              // stop_threshold crossed
  diverged,             // loss above 1e12 or non-finite state
  invariant_violation,  // PSD / positivity lost
};

std::string_view to_string(FlowStatus status);

inline constexpr double kDivergenceThreshold = 1e12;

/// One explicit step of y' = f(y). State must support y + h * dy.
template <class State, class Rhs>
State ode_step(Method method, const State& y, double h, Rhs&& f) {
  if (method == Method::euler) {
    State dy = f(y);
    return State(y + h * dy);
  }
  const State k1 = f(y);
  const State k2 = f(State(y + (0.5 * h) * k1));
  const State k3 = f(State(y + (0.5 * h) * k2));
  const State k4 = f(State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace quadnet
