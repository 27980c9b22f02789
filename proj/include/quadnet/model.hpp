#pragma once

#include <cstdint>
#include <string_view>

#include "quadnet/types.hpp"

namespace quadnet {

/// Hidden-layer weights of a quadratic-activation network, one unit per row,
/// together with the fixed second-layer scale (1/m).
class WeightMatrix {
 public:
  WeightMatrix(Matrix weights, double scale);

  Eigen::Index rows() const { return weights_.rows(); }
  Eigen::Index dims() const { return weights_.cols(); }
  const Matrix& weights() const { return weights_; }
  double scale() const { return scale_; }

 private:
  Matrix weights_;
  double scale_;
};

/// Symmetric d x d matrix in the space of second moments: A, A*, gradients.
/// Symmetry is checked on construction; positive semidefiniteness is not.
class GramMatrix {
 public:
  explicit GramMatrix(Matrix entries);

  static GramMatrix identity(Eigen::Index d);
  static GramMatrix zero(Eigen::Index d);
  static GramMatrix diagonal(const Vector& diag);

  Eigen::Index dims() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  double min_eigenvalue() const;
  double max_eigenvalue() const;
  /// Eigenvalues in ascending order.
  Vector eigenvalues() const;

 private:
  Matrix entries_;
};

/// n Gaussian inputs (rows) with their teacher outputs.
class Dataset {
 public:
  Dataset(Matrix inputs, Vector outputs);

  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dims() const { return inputs_.cols(); }
  const Matrix& inputs() const { return inputs_; }
  const Vector& outputs() const { return outputs_; }

 private:
  Matrix inputs_;
  Vector outputs_;
};

enum class TeacherEnsemble { gaussian_iid, orthonormal };

TeacherEnsemble parse_ensemble(std::string_view name);
std::string_view to_string(TeacherEnsemble ensemble);

/// Teacher with m_star units in d dimensions and scale 1/m_star.
/// Gaussian rows are i.i.d. standard normal. Orthonormal rows are mutually
/// orthogonal with squared norm m_star, so the teacher Gram matrix is a
/// rank-m_star projector (eigenvalues one and zero).
WeightMatrix make_teacher(Eigen::Index d, Eigen::Index m_star, TeacherEnsemble ensemble,
                          std::uint64_t seed);

/// Student with i.i.d. standard normal rows and scale 1/m; A(0) -> Id as m grows.
WeightMatrix make_student(Eigen::Index d, Eigen::Index m, std::uint64_t seed);

Dataset sample_dataset(const WeightMatrix& teacher, Eigen::Index n, std::uint64_t seed);

/// scale * sum_j (x . w_j)^2
double network_output(const WeightMatrix& w, const Eigen::Ref<const Vector>& x);

/// scale * sum_j w_j w_j^T
GramMatrix gram(const WeightMatrix& w);

struct CriticalSamples {
  std::int64_t n_c;
  double alpha_c_finite;
  double alpha_c_limit;
};

/// Sample-complexity threshold n_c = d(m*+1) - m*(m*+1)/2 for m* < d and
/// d(d+1)/2 once m* >= d.
CriticalSamples critical_samples(std::int64_t d, std::int64_t m_star);

}  // namespace quadnet
