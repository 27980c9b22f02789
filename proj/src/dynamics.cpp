#include "quadnet/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "quadnet/losses.hpp"

namespace quadnet {

Method parse_method(std::string_view name) {
  if (name == "euler") return Method::euler;
  if (name == "rk4") return Method::rk4;
  throw std::invalid_argument("unknown integration method '" + std::string(name) + "'");
}

std::string_view to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::completed: return "completed";
    case FlowStatus::stopped: return "stopped";
    case FlowStatus::diverged: return "diverged";
    case FlowStatus::invariant_violation: return "invariant_violation";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("IntegratorConfig: step must be positive");
  if (max_steps < 1) throw std::invalid_argument("IntegratorConfig: max_steps must be >= 1");
  if (record_every < 1) throw std::invalid_argument("IntegratorConfig: record_every must be >= 1");
  if (stop_threshold && !(*stop_threshold >= 0.0))
    throw std::invalid_argument("IntegratorConfig: stop_threshold must be nonnegative");
}

namespace {

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix descent(const Matrix& a, const Matrix& a_star, const Dataset* data) {
  const Matrix diff = a_star - a;
  return data ? detail::empirical_descent(diff, data->inputs()) : detail::population_descent(diff);
}

bool psd_within(const Matrix& a, double slack) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev(0) >= -slack * std::max(1.0, ev(ev.size() - 1));
}

// Appends records to a trajectory and decides whether integration continues.
class Recorder {
 public:
  Recorder(Trajectory& traj, const Matrix& a_star, const Dataset* data, double step,
           std::optional<double> stop_threshold, StopMetric stop_on, bool keep_snapshots)
      : traj_(traj),
        a_star_(a_star),
        data_(data),
        step_(step),
        stop_threshold_(stop_threshold),
        stop_on_(stop_on),
        keep_snapshots_(keep_snapshots) {}

  // Returns false once the flow must stop; the status is set accordingly.
  bool record(std::int64_t step, const Matrix& a, bool check_psd) {
    const Matrix diff = a - a_star_;
    const double gen = detail::population_loss(diff);
    const double train = data_ ? detail::empirical_loss(diff, data_->inputs()) : 0.0;
    if (!std::isfinite(gen) || !std::isfinite(train) || gen > kDivergenceThreshold ||
        train > kDivergenceThreshold) {
      traj_.status = FlowStatus::diverged;
      return false;
    }
    if (check_psd && !psd_within(a, 1e-6)) {
      traj_.status = FlowStatus::invariant_violation;
      return false;
    }
    traj_.steps.push_back(step);
    traj_.times.push_back(static_cast<double>(step) * step_);
    traj_.gen_loss.push_back(gen);
    if (data_) traj_.train_loss.push_back(train);
    if (keep_snapshots_) traj_.snapshots.emplace_back(a);
    traj_.terminal_gram.emplace(a);
    if (stop_threshold_) {
      const double watched = (stop_on_ == StopMetric::train_loss && data_) ? train : gen;
      if (watched <= *stop_threshold_) {
        traj_.status = FlowStatus::stopped;
        return false;
      }
    }
    return true;
  }

 private:
  Trajectory& traj_;
  const Matrix& a_star_;
  const Dataset* data_;
  double step_;
  std::optional<double> stop_threshold_;
  StopMetric stop_on_;
  bool keep_snapshots_;
};

bool due(std::int64_t step, std::int64_t every, std::int64_t last) {
  return step % every == 0 || step == last;
}

Trajectory run_weights(const WeightMatrix& w0, const GramMatrix& a_star, const Dataset* data,
                       const IntegratorConfig& cfg) {
  cfg.validate();
  if (w0.dims() != a_star.dims()) throw std::invalid_argument("gd_weights: dimension mismatch");
  if (data && data->dims() != w0.dims())
    throw std::invalid_argument("gd_weights: dataset dimension mismatch");

  Trajectory traj;
  traj.kind = {FlowSpace::weights, data ? LossKind::empirical : LossKind::population};
  const double scale = w0.scale();
  const Matrix& target = a_star.matrix();
  auto gram_of = [scale](const Matrix& w) {
    return symmetrized(scale * (w.transpose() * w));
  };
  // dW/dt = W G with G = -grad l(A) symmetric.
  auto rhs = [&](const Matrix& w) -> Matrix { return w * descent(gram_of(w), target, data); };

  Recorder rec(traj, target, data, cfg.step, cfg.stop_threshold, cfg.stop_on,
               cfg.keep_snapshots);
  Matrix w = w0.weights();
  Matrix last_good = w;
  if (rec.record(0, gram_of(w), false)) {
    for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
      w = ode_step(cfg.method, w, cfg.step, rhs);
      if (!w.allFinite()) {
        traj.status = FlowStatus::diverged;
        break;
      }
      if (due(step, cfg.record_every, cfg.max_steps)) {
        if (!rec.record(step, gram_of(w), false)) {
          if (traj.status != FlowStatus::diverged) last_good = w;
          break;
        }
        last_good = w;
      }
    }
  }
  traj.terminal_weights.emplace(last_good, scale);
  return traj;
}

Trajectory run_gram(const GramMatrix& a0, const GramMatrix& a_star, const Dataset* data,
                    const IntegratorConfig& cfg) {
  cfg.validate();
  if (a0.dims() != a_star.dims()) throw std::invalid_argument("flow_gram: dimension mismatch");
  if (data && data->dims() != a0.dims())
    throw std::invalid_argument("flow_gram: dataset dimension mismatch");
  if (!psd_within(a0.matrix(), 1e-10))
    throw std::invalid_argument("flow_gram: initial matrix is not positive semidefinite");

  Trajectory traj;
  traj.kind = {FlowSpace::gram, data ? LossKind::empirical : LossKind::population};
  const Matrix& target = a_star.matrix();
  auto rhs = [&](const Matrix& a) -> Matrix {
    const Matrix g = descent(a, target, data);
    return g * a + a * g;
  };

  Recorder rec(traj, target, data, cfg.step, cfg.stop_threshold, cfg.stop_on,
               cfg.keep_snapshots);
  Matrix a = a0.matrix();
  if (rec.record(0, a, false)) {
    for (std::int64_t step = 1; step <= cfg.max_steps; ++step) {
      a = symmetrized(ode_step(cfg.method, a, cfg.step, rhs));
      if (!a.allFinite()) {
        traj.status = FlowStatus::diverged;
        break;
      }
      if (due(step, cfg.record_every, cfg.max_steps) && !rec.record(step, a, true)) break;
    }
  }
  return traj;
}

}  // namespace

Trajectory gd_weights(const WeightMatrix& w0, const GramMatrix& a_star, const Dataset& data,
                      const IntegratorConfig& cfg) {
  return run_weights(w0, a_star, &data, cfg);
}

Trajectory gd_weights(const WeightMatrix& w0, const GramMatrix& a_star,
                      const IntegratorConfig& cfg) {
  return run_weights(w0, a_star, nullptr, cfg);
}

Trajectory flow_gram(const GramMatrix& a0, const GramMatrix& a_star, const Dataset& data,
                     const IntegratorConfig& cfg) {
  return run_gram(a0, a_star, &data, cfg);
}

Trajectory flow_gram(const GramMatrix& a0, const GramMatrix& a_star, const IntegratorConfig& cfg) {
  return run_gram(a0, a_star, nullptr, cfg);
}

Trajectory proximal_flow(const Matrix& b0, const GramMatrix& a_star, const Dataset& data,
                         double tau, std::int64_t steps, const ProximalOptions& opts) {
  if (!(tau > 0.0)) throw std::invalid_argument("proximal_flow: tau must be positive");
  if (steps < 0) throw std::invalid_argument("proximal_flow: negative step count");
  if (opts.record_every < 1) throw std::invalid_argument("proximal_flow: record_every must be >= 1");
  const Eigen::Index d = a_star.dims();
  if (b0.rows() != d || b0.cols() != d || data.dims() != d)
    throw std::invalid_argument("proximal_flow: dimension mismatch");

  Trajectory traj;
  traj.kind = {FlowSpace::gram, LossKind::empirical};
  const Matrix& target = a_star.matrix();
  auto gram_of = [](const Matrix& b) { return symmetrized(b * b.transpose()); };
  // B -> B_prev + tau G(B B^T) B, with G = -grad E_n.
  auto update = [&](const Matrix& b_prev, const Matrix& b_eval) -> Matrix {
    return b_prev + tau * (descent(gram_of(b_eval), target, &data) * b_eval);
  };

  Recorder rec(traj, target, &data, tau, std::nullopt, StopMetric::gen_loss, true);
  Matrix b = b0;
  Matrix last_good = b;
  if (rec.record(0, gram_of(b), false)) {
    for (std::int64_t p = 1; p <= steps; ++p) {
      Matrix next = update(b, b);
      if (opts.solver == ProximalSolver::implicit) {
        bool converged = false;
        for (int it = 0; it < opts.max_inner && next.allFinite(); ++it) {
          Matrix refined = update(b, next);
          const double change = (refined - next).norm();
          next = std::move(refined);
          if (change <= opts.inner_tol * std::max(1.0, next.norm())) {
            converged = true;
            break;
          }
        }
        if (!converged) {
          traj.status = FlowStatus::diverged;
          break;
        }
      }
      b = std::move(next);
      if (!b.allFinite()) {
        traj.status = FlowStatus::diverged;
        break;
      }
      if (due(p, opts.record_every, steps)) {
        if (!rec.record(p, gram_of(b), false)) break;
        last_good = b;
      }
    }
  }
  traj.terminal_factor = last_good;
  return traj;
}

}  // namespace quadnet
