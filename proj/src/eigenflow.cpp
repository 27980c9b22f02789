#include "quadnet/eigenflow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace quadnet {

Vector teacher_spectrum(const GramMatrix& a_star) {
  Vector ev = a_star.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
  // Rounding can leave tiny negatives where the teacher is rank deficient.
  const double floor = 1e-12 * std::max(1.0, ev(0));
  for (auto& v : ev)
    if (std::abs(v) <= floor) v = 0.0;
  return ev;
}

double eigen_loss(const Vector& lambdas, const Vector& lambdas_star) {
  if (lambdas.size() != lambdas_star.size())
    throw std::invalid_argument("eigen_loss: length mismatch");
  const Vector diff = lambdas - lambdas_star;
  const double s = diff.sum();
  return diff.squaredNorm() + 0.5 * s * s;
}

EigenTrajectory eigen_flow(const Vector& lambdas_star, const IntegratorConfig& cfg,
                           const std::optional<Vector>& initial) {
  cfg.validate();
  if (lambdas_star.size() < 1) throw std::invalid_argument("eigen_flow: empty spectrum");
  if ((lambdas_star.array() < 0.0).any())
    throw std::invalid_argument("eigen_flow: teacher eigenvalues must be nonnegative");
  Vector lam = initial.value_or(Vector::Ones(lambdas_star.size()));
  if (lam.size() != lambdas_star.size())
    throw std::invalid_argument("eigen_flow: initial condition has the wrong length");

  auto rhs = [&](const Vector& l) -> Vector {
    const double common = 2.0 * (lambdas_star - l).sum();
    return (common + 4.0 * (lambdas_star - l).array()).matrix().cwiseProduct(l);
  };

  EigenTrajectory traj;
  auto record = [&](std::int64_t step) {
    const double loss = eigen_loss(lam, lambdas_star);
    if (!std::isfinite(loss) || loss > kDivergenceThreshold) {
      traj.status = FlowStatus::diverged;
      return false;
    }
    if (lam.minCoeff() < -1e-12) {
      traj.status = FlowStatus::invariant_violation;
      return false;
    }
    traj.times.push_back(static_cast<double>(step) * cfg.step);
    traj.lambdas.push_back(lam);
    traj.loss.push_back(loss);
    if (cfg.stop_threshold && loss <= *cfg.stop_threshold) {
      traj.status = FlowStatus::stopped;
      return false;
    }
    return true;
  };

  if (!record(0)) return traj;
  for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
    lam = ode_step(cfg.method, lam, cfg.step, rhs);
    if (!lam.allFinite()) {
      traj.status = FlowStatus::diverged;
      break;
    }
    if ((step % cfg.record_every == 0 || step == cfg.max_steps) && !record(step)) break;
  }
  return traj;
}

ReducedTrajectory reduced_flow(long d, long m_star, const IntegratorConfig& cfg,
                               std::pair<double, double> initial) {
  cfg.validate();
  if (m_star < 1 || m_star > d) throw std::invalid_argument("reduced_flow: need 1 <= m* <= d");
  const double ms = static_cast<double>(m_star);
  const double nonin = static_cast<double>(d - m_star);
  const LVReport lv = lv_analysis(d, m_star);

  using State = Eigen::Vector2d;
  auto rhs = [&](const State& s) -> State {
    const double lam = s(0), eps = s(1);
    return State(lam * ((2.0 * ms + 4.0) * (1.0 - lam) - 2.0 * nonin * eps),
                 eps * (2.0 * ms * (1.0 - lam) - 2.0 * (2.0 + nonin) * eps));
  };

  ReducedTrajectory traj;
  traj.d = d;
  traj.m_star = m_star;
  State s(initial.first, initial.second);
  auto record = [&](std::int64_t step) {
    const double t = static_cast<double>(step) * cfg.step;
    const double informative = ms * (s(0) - 1.0);
    const double rest = nonin * s(1);
    const double loss = ms * (s(0) - 1.0) * (s(0) - 1.0) + nonin * s(1) * s(1) +
                        0.5 * (informative + rest) * (informative + rest);
    if (!std::isfinite(loss) || loss > kDivergenceThreshold) {
      traj.status = FlowStatus::diverged;
      return false;
    }
    if (s.minCoeff() < -1e-12) {
      traj.status = FlowStatus::invariant_violation;
      return false;
    }
    traj.times.push_back(t);
    traj.lambda.push_back(s(0));
    traj.epsilon.push_back(s(1));
    traj.loss.push_back(loss);
    traj.loss_approx.push_back(m_star < d ? lv.loss_approx(t) : 0.0);
    if (cfg.stop_threshold && loss <= *cfg.stop_threshold) {
      traj.status = FlowStatus::stopped;
      return false;
    }
    return true;
  };

  if (!record(0)) return traj;
  for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
    s = ode_step(cfg.method, s, cfg.step, rhs);
    if (!s.allFinite()) {
      traj.status = FlowStatus::diverged;
      break;
    }
    if ((step % cfg.record_every == 0 || step == cfg.max_steps) && !record(step)) break;
  }
  return traj;
}

LVReport lv_analysis(long d, long m_star) {
  if (d < 1 || m_star < 1) throw std::invalid_argument("lv_analysis: need d >= 1, m* >= 1");
  const double dd = static_cast<double>(d);
  const double ms = static_cast<double>(m_star);
  LVReport r;
  r.d = d;
  r.m_star = m_star;
  r.fixed_points = {std::pair{0.0, 0.0}, std::pair{0.0, ms / (2.0 + dd - ms)},
                    std::pair{1.0, 0.0}};
  if (m_star < d) {
    r.t0 = (dd - ms) / (2.0 * (2.0 + ms) * (2.0 + dd - ms));
    r.t_j = std::log((dd + 2.0) / (2.0 * (ms + 2.0))) / (ms + 2.0);
    r.lambda_t0 = (ms + 2.0) / (dd + 2.0);
    const double ratio = (dd - ms) / (2.0 + dd - ms);
    r.loss_tail_quadratic = ratio * ratio / 16.0;
  } else {
    r.loss_tail_exponential = 2.0 * (2.0 * dd + 4.0);
  }
  return r;
}

double LVReport::eps_closed_form(double t) const {
  return 1.0 / (1.0 + 2.0 * (2.0 + static_cast<double>(d - m_star)) * t);
}

double LVReport::lambda_closed_form(double t) const {
  if (!t0) return 1.0;
  if (t <= *t0) return eps_closed_form(t);
  const double l0 = *lambda_t0;
  const double g = std::exp(2.0 * (static_cast<double>(m_star) + 2.0) * (t - *t0));
  return l0 * g / (l0 * (g - 1.0) + 1.0);
}

double LVReport::loss_approx(double t) const {
  const double x = static_cast<double>(d - m_star) * eps_closed_form(t);
  return 0.25 * x * x;
}

}  // namespace quadnet
