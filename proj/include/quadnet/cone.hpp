#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "quadnet/model.hpp"
#include "quadnet/rng.hpp"

namespace quadnet {

/// Data rows sign-flipped into the closed hemisphere {x : x . v >= 0}.
struct FoldedSet {
  Matrix vectors;
  Vector fold_direction;
};

/// x_k -> x_k sign(x_k . v) with sign(0) = +1. Throws on a zero row, a
/// dimension mismatch or |v| != 1 (tolerance 1e-12).
FoldedSet fold(const Matrix& inputs, const Vector& v);
FoldedSet fold(const Dataset& data, const Vector& v);

struct ConeReport {
  std::vector<Eigen::Index> extremal_indices;  // ascending
  Eigen::Index count = 0;
  bool all_extremal = false;
};

/// The feasibility solve for row `index` did not converge.
class UndecidedRay : public std::runtime_error {
 public:
  explicit UndecidedRay(Eigen::Index index);
  Eigen::Index index() const { return index_; }

 private:
  Eigen::Index index_;
};

/// Row k is extremal iff it is not a nonnegative combination of the other
/// rows, i.e. the NNLS residual exceeds tol * |x_k|. Rows must be nonzero and
/// span a pointed cone.
ConeReport extremal_rays(const Matrix& vectors, double tol = 1e-9);

/// Same decision by exact rational phase-one simplex (Bland's rule). Intended
/// for small instances; the inputs are converted to rationals exactly.
ConeReport extremal_rays_exact(const Matrix& vectors);

/// True iff `target` lies in the cone spanned by the columns of `generators`,
/// decided in exact arithmetic.
bool cone_contains_exact(const Matrix& generators, const Vector& target);

using BigInt = boost::multiprecision::cpp_int;

/// Number of regions cut by n central hyperplanes in general position in R^d:
/// C(n, d) = 2 sum_{k<d} binom(n-1, k), with C(0, d) = 1.
BigInt cover_regions(std::int64_t n, std::int64_t d);

struct CoverValue {
  double expected_count;  // 2 n C(n-1, d-1) / C(n, d)
  BigInt c_table;         // C(n, d)
};

CoverValue cover_expected(std::int64_t n, std::int64_t d);

/// Large-d limit of E N / d at alpha = n / d.
double cover_limit(double alpha);

enum class Verdict { certified_no_negative_solution, not_certified };
std::string_view to_string(Verdict verdict);

struct Certificate {
  Verdict verdict = Verdict::not_certified;
  Eigen::Index count = 0;  // extremal rays of the folded cone
  Eigen::Index n = 0;
};

/// Folds along v and certifies iff some folded vector is interior (count < n).
/// The verdict is relative to v.
Certificate uniqueness_certificate(const Matrix& inputs, const Vector& v, double tol = 1e-9);
Certificate uniqueness_certificate(const Dataset& data, const Vector& v, double tol = 1e-9);

/// Fold direction drawn uniformly over the regions of the arrangement
/// {x_k^perp}, i.e. uniformly over the proper sign patterns of the rows.
/// This is the ensemble under which the expected extremal count is Cover's
/// value. Sampled exactly by deletion-restriction.
Vector region_uniform_direction(const Matrix& inputs, Rng& rng);

/// Uniform direction on the unit sphere.
Vector sphere_direction(Eigen::Index d, Rng& rng);

enum class FoldSampling { region_uniform, sphere };
FoldSampling parse_fold_sampling(std::string_view name);
std::string_view to_string(FoldSampling sampling);

struct ConeStats {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  Eigen::Index trials = 0;  // trials that produced a decided count
  double mean_count = 0.0;
  double stderr_count = 0.0;
  double formula_value = 0.0;
  double certified_fraction = 0.0;
  Eigen::Index undecided = 0;
};

/// Monte Carlo over Gaussian data sets (n rows in R^d), one fold per trial.
ConeStats cone_statistics(Eigen::Index n, Eigen::Index d, Eigen::Index trials,
                          std::uint64_t seed,
                          FoldSampling sampling = FoldSampling::region_uniform,
                          double tol = 1e-9);

}  // namespace quadnet
