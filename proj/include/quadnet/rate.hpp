#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "quadnet/dynamics.hpp"

namespace quadnet {

enum class DecayClass { quadratic, exponential, undetermined };

std::string_view to_string(DecayClass c);

struct RateReport {
  DecayClass decay_class = DecayClass::undetermined;
  std::optional<double> plateau;  // mean of t^2 E(t) over the tail (quadratic class)
  std::optional<double> rate;     // r in E ~ exp(-r t) (exponential class)
  bool bound_ok = false;
  double bound_constant = 0.0;    // largest C with E(t) <= E0 / (1 + 2 C E0 t)
  double power_exponent = 0.0;    // p in E ~ t^-p fitted on the tail
  double power_r2 = 0.0;
  double exp_r2 = 0.0;
  std::size_t tail_points = 0;
};

/// Classifies the decay of a loss curve over the final third of its time span
/// by comparing a power-law fit (log E vs log t) against an exponential fit
/// (log E vs t). Needs at least 10 positive samples in the tail.
RateReport rate_diagnostics(std::span<const double> times, std::span<const double> loss);

/// Uses the population loss of the trajectory.
RateReport rate_diagnostics(const Trajectory& traj);

}  // namespace quadnet
