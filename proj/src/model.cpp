#include "quadnet/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "quadnet/rng.hpp"

namespace quadnet {

WeightMatrix::WeightMatrix(Matrix weights, double scale)
    : weights_(std::move(weights)), scale_(scale) {
  if (weights_.rows() < 1 || weights_.cols() < 1)
    throw std::invalid_argument("WeightMatrix: need at least one unit and one dimension");
  if (!(scale_ > 0.0) || !std::isfinite(scale_))
    throw std::invalid_argument("WeightMatrix: scale must be positive and finite");
  if (!weights_.allFinite()) throw std::invalid_argument("WeightMatrix: non-finite weight");
}

GramMatrix::GramMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
    throw std::invalid_argument("GramMatrix: must be square and non-empty");
  if (!entries_.allFinite()) throw std::invalid_argument("GramMatrix: non-finite entry");
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  const double size = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * size) throw std::invalid_argument("GramMatrix: not symmetric");
}

GramMatrix GramMatrix::identity(Eigen::Index d) { return GramMatrix(Matrix::Identity(d, d)); }
GramMatrix GramMatrix::zero(Eigen::Index d) { return GramMatrix(Matrix::Zero(d, d)); }
GramMatrix GramMatrix::diagonal(const Vector& diag) {
  return GramMatrix(Matrix(diag.asDiagonal()));
}

Vector GramMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}
double GramMatrix::min_eigenvalue() const { return eigenvalues()(0); }
double GramMatrix::max_eigenvalue() const { return eigenvalues()(dims() - 1); }

Dataset::Dataset(Matrix inputs, Vector outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.rows() < 1) throw std::invalid_argument("Dataset: need at least one sample");
  if (inputs_.rows() != outputs_.size())
    throw std::invalid_argument("Dataset: inputs and outputs disagree on n");
  if (!inputs_.allFinite() || !outputs_.allFinite())
    throw std::invalid_argument("Dataset: non-finite entry");
  if ((outputs_.array() < 0.0).any())
    throw std::invalid_argument("Dataset: teacher outputs must be nonnegative");
}

TeacherEnsemble parse_ensemble(std::string_view name) {
  if (name == "gaussian" || name == "gaussian-iid") return TeacherEnsemble::gaussian_iid;
  if (name == "orthonormal") return TeacherEnsemble::orthonormal;
  throw std::invalid_argument("unknown teacher ensemble '" + std::string(name) + "'");
}

std::string_view to_string(TeacherEnsemble ensemble) {
  return ensemble == TeacherEnsemble::gaussian_iid ? "gaussian" : "orthonormal";
}

WeightMatrix make_teacher(Eigen::Index d, Eigen::Index m_star, TeacherEnsemble ensemble,
                          std::uint64_t seed) {
  if (d < 1 || m_star < 1) throw std::invalid_argument("make_teacher: need d >= 1, m* >= 1");
  Rng rng(derive_seed(seed, {0x7eac4e7}));
  const double scale = 1.0 / static_cast<double>(m_star);
  if (ensemble == TeacherEnsemble::gaussian_iid)
    return WeightMatrix(rng.normal_matrix(m_star, d), scale);

  if (m_star > d)
    throw std::invalid_argument("make_teacher: orthonormal teacher needs m* <= d (got m*=" +
                                std::to_string(m_star) + ", d=" + std::to_string(d) + ")");
  // Orthonormalize the columns of a Gaussian d x m* block.
  Eigen::MatrixXd g = rng.normal_matrix(d, m_star);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, m_star);
  Matrix rows = q.transpose() * std::sqrt(static_cast<double>(m_star));
  return WeightMatrix(std::move(rows), scale);
}

WeightMatrix make_student(Eigen::Index d, Eigen::Index m, std::uint64_t seed) {
  if (d < 1 || m < 1) throw std::invalid_argument("make_student: need d >= 1, m >= 1");
  Rng rng(derive_seed(seed, {0x57bd3e7}));
  return WeightMatrix(rng.normal_matrix(m, d), 1.0 / static_cast<double>(m));
}

Dataset sample_dataset(const WeightMatrix& teacher, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_dataset: n must be at least 1");
  Rng rng(derive_seed(seed, {0xda7a}));
  Matrix x = rng.normal_matrix(n, teacher.dims());
  Vector y(n);
  for (Eigen::Index k = 0; k < n; ++k) y(k) = network_output(teacher, x.row(k).transpose());
  return Dataset(std::move(x), std::move(y));
}

double network_output(const WeightMatrix& w, const Eigen::Ref<const Vector>& x) {
  if (x.size() != w.dims())
    throw std::invalid_argument("network_output: input has " + std::to_string(x.size()) +
                                " dims, network expects " + std::to_string(w.dims()));
  const Vector pre = w.weights() * x;
  return w.scale() * pre.squaredNorm();
}

GramMatrix gram(const WeightMatrix& w) {
  Matrix a = w.scale() * (w.weights().transpose() * w.weights());
  // The product is symmetric up to rounding; make it exactly so.
  a = 0.5 * (a + a.transpose()).eval();
  return GramMatrix(std::move(a));
}

CriticalSamples critical_samples(std::int64_t d, std::int64_t m_star) {
  if (d < 1 || m_star < 0) throw std::invalid_argument("critical_samples: need d >= 1, m* >= 0");
  const std::int64_t n_c =
      m_star < d ? d * (m_star + 1) - m_star * (m_star + 1) / 2 : d * (d + 1) / 2;
  return {n_c, static_cast<double>(n_c) / static_cast<double>(d),
          static_cast<double>(m_star + 1)};
}

}  // namespace quadnet
