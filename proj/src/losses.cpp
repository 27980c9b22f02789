#include "quadnet/losses.hpp"

#include <stdexcept>

namespace quadnet {
namespace {

class Accumulator {
 public:
  explicit Accumulator(bool compensated) : compensated_(compensated) {}
  void add(double v) {
    if (!compensated_) {
      sum_ += v;
      return;
    }
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  bool compensated_;
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void check_dims(const GramMatrix& a, const GramMatrix& a_star) {
  if (a.dims() != a_star.dims())
    throw std::invalid_argument("Gram matrices disagree on dimension");
}

void check_dims(const GramMatrix& a, const GramMatrix& a_star, const Dataset& data) {
  check_dims(a, a_star);
  if (data.dims() != a.dims()) throw std::invalid_argument("dataset dimension mismatch");
}

// x^T m x with plain loops; faster than Eigen's dynamic kernels at the small d used here.
double quad_form(const Matrix& m, const double* x) {
  const Eigen::Index d = m.rows();
  const double* row = m.data();
  double total = 0.0;
  for (Eigen::Index i = 0; i < d; ++i, row += d) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) acc += row[j] * x[j];
    total += x[i] * acc;
  }
  return total;
}

}  // namespace

namespace detail {

double empirical_loss(const Matrix& diff, const Matrix& inputs) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
    const double r = quad_form(diff, inputs.row(k).data());
    sum += r * r;
  }
  return 0.5 * sum / static_cast<double>(inputs.rows());
}

Matrix empirical_descent(const Matrix& a_star_minus_a, const Matrix& inputs) {
  const Eigen::Index d = inputs.cols();
  // Accumulate the upper triangle only, then mirror: the result is exactly symmetric.
  Matrix g = Matrix::Zero(d, d);
  for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
    const double* x = inputs.row(k).data();
    const double r = quad_form(a_star_minus_a, x);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double rxi = r * x[i];
      double* gi = g.data() + i * d;
      for (Eigen::Index j = i; j < d; ++j) gi[j] += rxi * x[j];
    }
  }
  g /= static_cast<double>(inputs.rows());
  g.triangularView<Eigen::StrictlyLower>() = g.transpose().triangularView<Eigen::StrictlyLower>();
  return g;
}

double population_loss(const Matrix& diff) {
  const double tr = diff.trace();
  return diff.squaredNorm() + 0.5 * tr * tr;
}

Matrix population_descent(const Matrix& a_star_minus_a) {
  Matrix g = 2.0 * a_star_minus_a;
  g.diagonal().array() += a_star_minus_a.trace();
  return g;
}

}  // namespace detail

double empirical_loss_weights(const WeightMatrix& w, const Dataset& data, const LossOptions& opts) {
  if (data.dims() != w.dims()) throw std::invalid_argument("dataset dimension mismatch");
  Accumulator acc(opts.compensated);
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    const double r = data.outputs()(k) - network_output(w, data.inputs().row(k).transpose());
    acc.add(r * r);
  }
  return 0.25 * acc.value() / static_cast<double>(data.size());
}

double empirical_gram_loss(const GramMatrix& a, const GramMatrix& a_star, const Dataset& data,
                           const LossOptions& opts) {
  check_dims(a, a_star, data);
  const Matrix diff = a.matrix() - a_star.matrix();
  if (!opts.compensated) return detail::empirical_loss(diff, data.inputs());
  Accumulator acc(true);
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    const double r = quad_form(diff, data.inputs().row(k).data());
    acc.add(r * r);
  }
  return 0.5 * acc.value() / static_cast<double>(data.size());
}

GramMatrix empirical_gram_grad(const GramMatrix& a, const GramMatrix& a_star,
                               const Dataset& data) {
  check_dims(a, a_star, data);
  return GramMatrix(-detail::empirical_descent(a_star.matrix() - a.matrix(), data.inputs()));
}

double population_loss(const GramMatrix& a, const GramMatrix& a_star) {
  check_dims(a, a_star);
  return detail::population_loss(a.matrix() - a_star.matrix());
}

GramMatrix population_grad(const GramMatrix& a, const GramMatrix& a_star) {
  check_dims(a, a_star);
  return GramMatrix(-detail::population_descent(a_star.matrix() - a.matrix()));
}

}  // namespace quadnet
