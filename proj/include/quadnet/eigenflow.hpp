#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "quadnet/model.hpp"
#include "quadnet/ode.hpp"

namespace quadnet {

/// Eigenvalues of A(t) in the teacher eigenbasis, started from A(0) = Id.
struct EigenTrajectory {
  std::vector<double> times;
  std::vector<Vector> lambdas;
  std::vector<double> loss;  // E
  FlowStatus status = FlowStatus::completed;
};

/// Teacher spectrum in the eigenbasis convention: descending, zeros last.
Vector teacher_spectrum(const GramMatrix& a_star);

/// sum (l_j - l*_j)^2 + (sum (l_j - l*_j))^2 / 2
double eigen_loss(const Vector& lambdas, const Vector& lambdas_star);

/// dl_i/dt = 2 sum_j (l*_j - l_j) l_i + 4 (l*_i - l_i) l_i, l_i(0) = 1 unless
/// `initial` is given. stop_threshold applies to the loss.
EigenTrajectory eigen_flow(const Vector& lambdas_star, const IntegratorConfig& cfg,
                           const std::optional<Vector>& initial = std::nullopt);

/// Orthonormal-teacher reduction to the common informative eigenvalue lambda
/// and the mean non-informative eigenvalue epsilon (a Lotka-Volterra pair).
struct ReducedTrajectory {
  long d = 0;
  long m_star = 0;
  std::vector<double> times;
  std::vector<double> lambda;
  std::vector<double> epsilon;
  std::vector<double> loss;         // E evaluated on the reduced state
  std::vector<double> loss_approx;  // closed-form approximation at the same times
  FlowStatus status = FlowStatus::completed;
};

ReducedTrajectory reduced_flow(long d, long m_star, const IntegratorConfig& cfg,
                               std::pair<double, double> initial = {1.0, 1.0});

/// Fixed points, timescales and closed-form approximations of the reduced system.
struct LVReport {
  long d = 0;
  long m_star = 0;
  std::array<std::pair<double, double>, 3> fixed_points{};
  // Present when m* < d (non-informative eigenvalues exist).
  std::optional<double> t0;
  std::optional<double> t_j;
  std::optional<double> lambda_t0;
  std::optional<double> loss_tail_quadratic;  // plateau of t^2 loss_approx(t)
  // Present when m* >= d.
  std::optional<double> loss_tail_exponential;  // decay rate 2(2d + 4)

  double eps_closed_form(double t) const;
  double lambda_closed_form(double t) const;
  /// (1/4) ((d - m*) / (1 + 2 (2 + d - m*) t))^2
  double loss_approx(double t) const;
};

LVReport lv_analysis(long d, long m_star);

}  // namespace quadnet
