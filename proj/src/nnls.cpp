#include "quadnet/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace quadnet {

namespace {

Vector solve_passive(const Matrix& a, const Vector& b, const std::vector<Eigen::Index>& passive) {
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t j = 0; j < passive.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = a.col(passive[j]);
  return sub.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Matrix& a, const Vector& b, int max_iter) {
  const Eigen::Index n = a.cols();
  if (max_iter <= 0) max_iter = std::max<int>(3 * static_cast<int>(n), 30);
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = 10.0 * eps * static_cast<double>(std::max(a.rows(), n)) * a.norm() *
                     std::max(b.norm(), 1e-300);

  NnlsResult res;
  res.x = Vector::Zero(n);
  std::vector<char> in_passive(static_cast<std::size_t>(n), 0);
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  Vector r = b;
  Vector w = a.transpose() * r;

  while (true) {
    Eigen::Index t = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (in_passive[j] || blocked[j]) continue;
      if (w(j) > best) {
        best = w(j);
        t = j;
      }
    }
    if (t < 0) {
      res.converged = true;
      break;
    }
    if (res.iterations++ >= max_iter) break;
    in_passive[t] = 1;

    bool first = true;
    for (int inner = 0; inner <= 3 * n + 3; ++inner) {
      std::vector<Eigen::Index> passive;
      for (Eigen::Index j = 0; j < n; ++j)
        if (in_passive[j]) passive.push_back(j);
      const Vector s = solve_passive(a, b, passive);
      if (first) {
        first = false;
        const auto pos = std::find(passive.begin(), passive.end(), t) - passive.begin();
        if (s(pos) <= 0.0) {
          // Rounding made the entering coefficient nonpositive; skip t until the set changes.
          in_passive[t] = 0;
          blocked[t] = 1;
          break;
        }
      }
      if ((s.array() > 0.0).all()) {
        res.x.setZero();
        for (std::size_t j = 0; j < passive.size(); ++j) res.x(passive[j]) = s(static_cast<Eigen::Index>(j));
        std::fill(blocked.begin(), blocked.end(), 0);
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < passive.size(); ++j) {
        const double sj = s(static_cast<Eigen::Index>(j));
        if (sj <= 0.0) {
          const double xj = res.x(passive[j]);
          alpha = std::min(alpha, xj / (xj - sj));
        }
      }
      for (std::size_t j = 0; j < passive.size(); ++j) {
        const Eigen::Index idx = passive[j];
        res.x(idx) += alpha * (s(static_cast<Eigen::Index>(j)) - res.x(idx));
        if (res.x(idx) <= eps * 10.0) {
          res.x(idx) = 0.0;
          in_passive[idx] = 0;
        }
      }
    }
    r = b - a * res.x;
    w = a.transpose() * r;
  }
  res.residual = b - a * res.x;
  return res;
}

std::optional<Vector> ldp_feasible_point(const Matrix& g, const Vector& h) {
  const Eigen::Index m = g.rows();
  const Eigen::Index d = g.cols();
  Matrix e(d + 1, m);
  e.topRows(d) = g.transpose();
  e.row(d) = h.transpose();
  Vector f = Vector::Zero(d + 1);
  f(d) = 1.0;
  const NnlsResult sol = nnls(e, f);
  // Residual here is f - E s; the LDP solution uses E s - f.
  const Vector r = -sol.residual;
  if (r.norm() < 1e-10 || r(d) > -1e-12) return std::nullopt;
  Vector u = -r.head(d) / r(d);
  if (m > 0 && ((g * u - h).array() < -1e-9 * (1.0 + h.array().abs())).any()) return std::nullopt;
  return u;
}

}  // namespace quadnet
