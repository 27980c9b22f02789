#pragma once

#include <cmath>
#include <cstdint>

#include "quadnet/model.hpp"
#include "quadnet/rng.hpp"

namespace quadnet::testing {

// G G^T / d with Gaussian G: a generic full-rank PSD matrix.
inline GramMatrix random_psd(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix g = rng.normal_matrix(d, d);
  return GramMatrix(Matrix(0.5 * (g * g.transpose() + (g * g.transpose()).transpose()) / static_cast<double>(d)));
}

inline Dataset gaussian_inputs(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  return Dataset(rng.normal_matrix(n, d), Vector::Zero(n));
}

}  // namespace quadnet::testing
