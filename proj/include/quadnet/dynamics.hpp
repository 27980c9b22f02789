#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quadnet/model.hpp"
#include "quadnet/ode.hpp"

namespace quadnet {

enum class FlowSpace { weights, gram };
enum class LossKind { empirical, population };

struct FlowKind {
  FlowSpace space;
  LossKind loss;
};

/// Recorded history of one flow. Times are strictly increasing; train_loss
/// (E_n) is empty for population flows; gen_loss is the population loss E.
struct Trajectory {
  FlowKind kind{FlowSpace::gram, LossKind::population};
  std::vector<std::int64_t> steps;
  std::vector<double> times;
  std::vector<double> train_loss;
  std::vector<double> gen_loss;
  std::vector<GramMatrix> snapshots;  // one per record when requested

  std::optional<GramMatrix> terminal_gram;
  std::optional<WeightMatrix> terminal_weights;  // weight flows
  std::optional<Matrix> terminal_factor;         // proximal iterates B_p

  FlowStatus status = FlowStatus::completed;

  std::size_t size() const { return times.size(); }
  bool diverged() const { return status == FlowStatus::diverged; }
};

/// Gradient descent on the weights, w_i <- w_i + eta G w_i where G = -grad E_n
/// (empirical) or -grad E (population). This is the Euler discretization of
/// dw_i/dt = -m dL/dw_i. `method = rk4` integrates the same vector field.
Trajectory gd_weights(const WeightMatrix& w0, const GramMatrix& a_star, const Dataset& data,
                      const IntegratorConfig& cfg);
Trajectory gd_weights(const WeightMatrix& w0, const GramMatrix& a_star,
                      const IntegratorConfig& cfg);

/// dA/dt = -A grad l(A) - grad l(A) A with l = E_n or E, symmetrized after every step.
Trajectory flow_gram(const GramMatrix& a0, const GramMatrix& a_star, const Dataset& data,
                     const IntegratorConfig& cfg);
Trajectory flow_gram(const GramMatrix& a0, const GramMatrix& a_star, const IntegratorConfig& cfg);

enum class ProximalSolver {
  first_order,  // B_p = B_{p-1} - tau grad E_n(B_{p-1} B_{p-1}^T) B_{p-1}
  implicit,     // fixed point of B = B_{p-1} - tau grad E_n(B B^T) B
};

struct ProximalOptions {
  std::int64_t record_every = 1;
  ProximalSolver solver = ProximalSolver::first_order;
  int max_inner = 200;
  double inner_tol = 1e-14;
};

/// Proximal iteration in the Cholesky-like factor B (A = B B^T). Records E_n,
/// E and snapshots of A_p at times p * tau.
Trajectory proximal_flow(const Matrix& b0, const GramMatrix& a_star, const Dataset& data,
                         double tau, std::int64_t steps, const ProximalOptions& opts = {});

}  // namespace quadnet
