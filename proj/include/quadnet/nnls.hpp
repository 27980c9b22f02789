#pragma once

#include <optional>

#include "quadnet/types.hpp"

namespace quadnet {

struct NnlsResult {
  Vector x;
  Vector residual;  // b - A x
  int iterations = 0;
  bool converged = false;
};

/// min |A x - b| subject to x >= 0, Lawson-Hanson active set. `max_iter`
/// bounds the outer iterations; 0 selects max(3 n, 30).
NnlsResult nnls(const Matrix& a, const Vector& b, int max_iter = 0);

/// Least-distance feasibility: a point u with G u >= h, or nullopt if the
/// system has no solution. Solved as an NNLS problem on [G^T; h^T].
std::optional<Vector> ldp_feasible_point(const Matrix& g, const Vector& h);

}  // namespace quadnet
