#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "quadnet/types.hpp"

namespace quadnet {

/// SplitMix64 finalizer. Stable across platforms and releases.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent 64-bit seed from a base seed and a list of
/// coordinates (cell indices, trial index, stream tag, ...).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> coords);

/// Seeded source of standard normal draws. One instance per stochastic
/// operation; never shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t below(std::uint64_t bound);

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace quadnet
