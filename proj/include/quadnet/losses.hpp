#pragma once

#include "quadnet/model.hpp"

namespace quadnet {

/// Reduction over samples is always sequential in index order. `compensated`
/// switches on Kahan summation.
struct LossOptions {
  bool compensated = false;
};

/// L_n(W) = (1/4n) sum_k (y_k - f(x_k))^2
double empirical_loss_weights(const WeightMatrix& w, const Dataset& data,
                              const LossOptions& opts = {});

/// E_n(A) = (1/2n) sum_k (x_k^T (A - A*) x_k)^2, equal to 2 L_n.
double empirical_gram_loss(const GramMatrix& a, const GramMatrix& a_star, const Dataset& data,
                           const LossOptions& opts = {});

/// grad E_n(A) = -(1/n) sum_k [x_k^T (A* - A) x_k] x_k x_k^T
GramMatrix empirical_gram_grad(const GramMatrix& a, const GramMatrix& a_star,
                               const Dataset& data);

/// E(A) = tr((A - A*)^2) + (tr(A - A*))^2 / 2, the Gaussian-input expectation of E_n.
double population_loss(const GramMatrix& a, const GramMatrix& a_star);

/// grad E(A) = 2 (A - A*) + tr(A - A*) Id
GramMatrix population_grad(const GramMatrix& a, const GramMatrix& a_star);

namespace detail {

// Matrix-level kernels shared with the integrators; no validation.
double empirical_loss(const Matrix& diff, const Matrix& inputs);
// Returns G = (1/n) sum_k [x_k^T (A* - A) x_k] x_k x_k^T = -grad E_n.
Matrix empirical_descent(const Matrix& a_star_minus_a, const Matrix& inputs);
double population_loss(const Matrix& diff);
Matrix population_descent(const Matrix& a_star_minus_a);

}  // namespace detail

}  // namespace quadnet
