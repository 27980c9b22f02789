#include "quadnet/rate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace quadnet {

std::string_view to_string(DecayClass c) {
  switch (c) {
    case DecayClass::quadratic: return "quadratic";
    case DecayClass::exponential: return "exponential";
    case DecayClass::undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sse = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - f.sse / syy : 1.0;
  return f;
}

}  // namespace

RateReport rate_diagnostics(std::span<const double> times, std::span<const double> loss) {
  if (times.size() != loss.size())
    throw std::invalid_argument("rate_diagnostics: times and loss differ in length");
  RateReport report;
  if (times.size() < 2) return report;

  const double t_first = times.front();
  const double t_last = times.back();
  const double t_tail = t_first + (2.0 / 3.0) * (t_last - t_first);

  std::vector<double> log_t, t, log_e, t2e;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_tail || !(times[i] > 0.0) || !(loss[i] > 0.0)) continue;
    log_t.push_back(std::log(times[i]));
    t.push_back(times[i]);
    log_e.push_back(std::log(loss[i]));
    t2e.push_back(times[i] * times[i] * loss[i]);
  }
  report.tail_points = t.size();

  // Bound E(t) <= E0 / (1 + 2 C E0 (t - t0)): the largest admissible C.
  const double e0 = loss.front();
  double c_max = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - t_first;
    if (dt <= 0.0) continue;
    c_max = std::min(c_max, (e0 / loss[i] - 1.0) / (2.0 * e0 * dt));
  }
  bool tail_decreasing = t.size() >= 2;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] * std::exp(log_e[i]) < t[i - 1] * std::exp(log_e[i - 1]))) tail_decreasing = false;
  report.bound_constant = std::isfinite(c_max) ? c_max : 0.0;
  report.bound_ok = std::isfinite(e0) && std::isfinite(c_max) && c_max > 0.0 && tail_decreasing;

  if (t.size() < 10) return report;

  const LineFit power = fit_line(log_t, log_e);
  const LineFit expo = fit_line(t, log_e);
  report.power_exponent = -power.slope;
  report.power_r2 = power.r2;
  report.exp_r2 = expo.r2;

  if (power.sse <= expo.sse && std::abs(report.power_exponent - 2.0) < 0.5) {
    double mean = 0.0;
    for (double v : t2e) mean += v;
    report.decay_class = DecayClass::quadratic;
    report.plateau = mean / static_cast<double>(t2e.size());
  } else if (expo.sse < power.sse && expo.slope < 0.0 && expo.r2 > 0.99) {
    report.decay_class = DecayClass::exponential;
    report.rate = -expo.slope;
  }
  return report;
}

RateReport rate_diagnostics(const Trajectory& traj) {
  return rate_diagnostics(std::span<const double>(traj.times),
                          std::span<const double>(traj.gen_loss));
}

}  // namespace quadnet
