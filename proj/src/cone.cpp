#include "quadnet/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "quadnet/nnls.hpp"

namespace quadnet {

using boost::multiprecision::cpp_rational;

FoldedSet fold(const Matrix& inputs, const Vector& v) {
  if (v.size() != inputs.cols()) throw std::invalid_argument("fold: direction has the wrong length");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw std::invalid_argument("fold: direction must be a unit vector");
  FoldedSet out{inputs, v};
  for (Eigen::Index k = 0; k < inputs.rows(); ++k) {
    if (inputs.row(k).squaredNorm() == 0.0)
      throw std::invalid_argument("fold: zero data row " + std::to_string(k));
    if (inputs.row(k).dot(v) < 0.0) out.vectors.row(k) *= -1.0;
  }
  return out;
}

FoldedSet fold(const Dataset& data, const Vector& v) { return fold(data.inputs(), v); }

UndecidedRay::UndecidedRay(Eigen::Index index)
    : std::runtime_error("extremal_rays: feasibility solve did not converge for row " +
                         std::to_string(index)),
      index_(index) {}

namespace {

void check_rows(const Matrix& vectors) {
  if (vectors.rows() < 1 || vectors.cols() < 1) throw std::invalid_argument("extremal_rays: empty input");
  if (!vectors.allFinite()) throw std::invalid_argument("extremal_rays: non-finite input");
  for (Eigen::Index k = 0; k < vectors.rows(); ++k)
    if (vectors.row(k).squaredNorm() == 0.0)
      throw std::invalid_argument("extremal_rays: zero row " + std::to_string(k));
}

Matrix others_as_columns(const Matrix& vectors, Eigen::Index k) {
  Matrix cols(vectors.cols(), vectors.rows() - 1);
  for (Eigen::Index j = 0, c = 0; j < vectors.rows(); ++j)
    if (j != k) cols.col(c++) = vectors.row(j).transpose();
  return cols;
}

ConeReport finish(std::vector<Eigen::Index> idx, Eigen::Index n) {
  ConeReport r;
  r.count = static_cast<Eigen::Index>(idx.size());
  r.all_extremal = r.count == n;
  r.extremal_indices = std::move(idx);
  return r;
}

}  // namespace

ConeReport extremal_rays(const Matrix& vectors, double tol) {
  check_rows(vectors);
  if (!(tol > 0.0)) throw std::invalid_argument("extremal_rays: tol must be positive");
  const Eigen::Index n = vectors.rows();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (n == 1) {
      idx.push_back(k);
      continue;
    }
    const Vector target = vectors.row(k).transpose();
    const NnlsResult sol = nnls(others_as_columns(vectors, k), target);
    if (!sol.converged) throw UndecidedRay(k);
    if (sol.residual.norm() > tol * target.norm()) idx.push_back(k);
  }
  return finish(std::move(idx), n);
}

bool cone_contains_exact(const Matrix& generators, const Vector& target) {
  const Eigen::Index d = generators.rows();
  const Eigen::Index k = generators.cols();
  if (target.size() != d) throw std::invalid_argument("cone_contains_exact: dimension mismatch");
  const Eigen::Index ncols = k + d;
  // Phase-one tableau: rows 0..d-1 constraints, row d the objective; last column rhs.
  std::vector<std::vector<cpp_rational>> t(static_cast<std::size_t>(d + 1),
                                           std::vector<cpp_rational>(static_cast<std::size_t>(ncols + 1)));
  for (Eigen::Index i = 0; i < d; ++i) {
    const bool flip = target(i) < 0.0;
    auto& row = t[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) {
      row[static_cast<std::size_t>(j)] = cpp_rational(generators(i, j));
      if (flip) row[static_cast<std::size_t>(j)] = -row[static_cast<std::size_t>(j)];
    }
    row[static_cast<std::size_t>(k + i)] = 1;
    row[static_cast<std::size_t>(ncols)] = cpp_rational(flip ? -target(i) : target(i));
  }
  auto& obj = t[static_cast<std::size_t>(d)];
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < d; ++i) obj[static_cast<std::size_t>(j)] -= t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  for (Eigen::Index i = 0; i < d; ++i) obj[static_cast<std::size_t>(ncols)] -= t[static_cast<std::size_t>(i)][static_cast<std::size_t>(ncols)];
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) basis[static_cast<std::size_t>(i)] = k + i;

  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < ncols; ++j)
      if (obj[static_cast<std::size_t>(j)] < 0) {
        enter = j;
        break;
      }
    if (enter < 0) break;
    Eigen::Index leave = -1;
    cpp_rational best;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& row = t[static_cast<std::size_t>(i)];
      if (row[static_cast<std::size_t>(enter)] <= 0) continue;
      const cpp_rational ratio = row[static_cast<std::size_t>(ncols)] / row[static_cast<std::size_t>(enter)];
      if (leave < 0 || ratio < best ||
          (ratio == best && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) break;  // unbounded direction; cannot occur in phase one
    auto& prow = t[static_cast<std::size_t>(leave)];
    const cpp_rational piv = prow[static_cast<std::size_t>(enter)];
    for (auto& v : prow) v /= piv;
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (i == leave) continue;
      auto& row = t[static_cast<std::size_t>(i)];
      const cpp_rational factor = row[static_cast<std::size_t>(enter)];
      if (factor == 0) continue;
      for (Eigen::Index j = 0; j <= ncols; ++j) row[static_cast<std::size_t>(j)] -= factor * prow[static_cast<std::size_t>(j)];
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  return obj[static_cast<std::size_t>(ncols)] == 0;
}

ConeReport extremal_rays_exact(const Matrix& vectors) {
  check_rows(vectors);
  const Eigen::Index n = vectors.rows();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (n == 1 || !cone_contains_exact(others_as_columns(vectors, k), vectors.row(k).transpose()))
      idx.push_back(k);
  }
  return finish(std::move(idx), n);
}

BigInt cover_regions(std::int64_t n, std::int64_t d) {
  if (n < 0 || d < 0) throw std::invalid_argument("cover_regions: negative argument");
  if (n == 0) return 1;
  BigInt sum = 0;
  BigInt binom = 1;  // binom(n-1, k)
  for (std::int64_t k = 0; k < d && k <= n - 1; ++k) {
    sum += binom;
    binom = binom * (n - 1 - k) / (k + 1);
  }
  return 2 * sum;
}

CoverValue cover_expected(std::int64_t n, std::int64_t d) {
  if (n < 1 || d < 1) throw std::invalid_argument("cover_expected: need n >= 1, d >= 1");
  const BigInt total = cover_regions(n, d);
  const BigInt num = 2 * BigInt(n) * cover_regions(n - 1, d - 1);
  return {static_cast<double>(cpp_rational(num, total)), total};
}

double cover_limit(double alpha) { return std::min(alpha, 2.0); }

std::string_view to_string(Verdict verdict) {
  return verdict == Verdict::certified_no_negative_solution ? "certified_no_negative_solution"
                                                            : "not_certified";
}

Certificate uniqueness_certificate(const Matrix& inputs, const Vector& v, double tol) {
  const FoldedSet folded = fold(inputs, v);
  const ConeReport report = extremal_rays(folded.vectors, tol);
  Certificate c;
  c.n = inputs.rows();
  c.count = report.count;
  c.verdict = report.count < c.n ? Verdict::certified_no_negative_solution : Verdict::not_certified;
  return c;
}

Certificate uniqueness_certificate(const Dataset& data, const Vector& v, double tol) {
  return uniqueness_certificate(data.inputs(), v, tol);
}

namespace {

// Component of x orthogonal to basis[0..count).
Vector project_out(Vector x, const std::vector<Vector>& basis, std::size_t count) {
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t i = 0; i < count; ++i) x -= basis[i].dot(x) * basis[i];
  return x;
}

}  // namespace

// Regions of an arrangement split as r(A) = r(A - H) + r(A^H). Walking the
// hyperplanes from last to first, each is deleted with probability
// r(A - H) / r(A) and restricted otherwise. A deleted region R' maps to the
// part of R' on the positive side of H when that part is nonempty; a region
// of the restriction maps to the negative side of the region of A - H it cuts.
Vector region_uniform_direction(const Matrix& inputs, Rng& rng) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  if (n < 1 || d < 1) throw std::invalid_argument("region_uniform_direction: empty input");
  Matrix x = inputs;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double nk = x.row(k).norm();
    if (nk == 0.0) throw std::invalid_argument("region_uniform_direction: zero row");
    x.row(k) /= nk;
  }

  // r(k, j): regions of k generic central hyperplanes in R^j.
  Matrix r(n + 1, d + 1);
  r.setZero();
  for (Eigen::Index j = 0; j <= d; ++j) r(0, j) = 1.0;
  for (Eigen::Index k = 1; k <= n; ++k)
    for (Eigen::Index j = 1; j <= d; ++j) r(k, j) = r(k - 1, j) + r(k - 1, j - 1);

  std::vector<Vector> basis;  // orthonormal normals of the restrictions, in order
  std::vector<char> restricted(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> level(static_cast<std::size_t>(n), 0);
  Eigen::Index dim = d;
  Eigen::Index k = n - 1;
  for (; k >= 0 && dim > 1; --k) {
    level[static_cast<std::size_t>(k)] = basis.size();
    if (rng.uniform() < r(k, dim) / r(k + 1, dim)) continue;
    restricted[static_cast<std::size_t>(k)] = 1;
    Vector p = project_out(x.row(k).transpose(), basis, basis.size());
    basis.push_back(p.normalized());
    --dim;
  }

  auto random_in_subspace = [&]() {
    Vector g(d);
    for (auto& v : g) v = rng.normal();
    return project_out(g, basis, basis.size()).normalized();
  };
  Vector u = random_in_subspace();
  if (k >= 0 && rng.uniform() < 0.5) u = -u;  // line base case: pick one of the two rays

  // Orthonormal complement of all restriction normals.
  Matrix full(d, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) full.col(static_cast<Eigen::Index>(i)) = basis[i];
  Matrix complement;
  {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(full)};
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    complement = q.rightCols(d - static_cast<Eigen::Index>(basis.size()));
  }

  for (Eigen::Index j = k + 1; j < n; ++j) {
    const std::size_t nb = level[static_cast<std::size_t>(j)];
    const Vector xj = x.row(j).transpose();
    if (restricted[static_cast<std::size_t>(j)]) {
      const Vector p = project_out(xj, basis, nb);
      double delta = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < j; ++i) {
        const double slope = std::abs(x.row(i).dot(p));
        const double margin = std::abs(x.row(i).dot(u));
        if (slope > 0.0 && margin > 0.0) delta = std::min(delta, margin / slope);
      }
      delta = std::isfinite(delta) ? 0.5 * delta : 1.0;
      u -= delta * p;
    } else if (xj.dot(u) <= 0.0) {
      const Eigen::Index sub = d - static_cast<Eigen::Index>(nb);
      Matrix b(d, sub);
      for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(basis.size() - nb); ++c)
        b.col(c) = basis[nb + static_cast<std::size_t>(c)];
      b.rightCols(complement.cols()) = complement;
      Matrix g(j + 1, sub);
      for (Eigen::Index i = 0; i < j; ++i) {
        const double s = x.row(i).dot(u) >= 0.0 ? 1.0 : -1.0;
        g.row(i) = s * (x.row(i) * b);
      }
      g.row(j) = xj.transpose() * b;
      if (auto z = ldp_feasible_point(g, Vector::Ones(j + 1))) u = b * *z;
    }
    u.normalize();
  }
  return u;
}

Vector sphere_direction(Eigen::Index d, Rng& rng) {
  Vector g(d);
  do {
    for (auto& v : g) v = rng.normal();
  } while (g.norm() == 0.0);
  return g.normalized();
}

FoldSampling parse_fold_sampling(std::string_view name) {
  if (name == "region" || name == "region-uniform" || name == "cover") return FoldSampling::region_uniform;
  if (name == "sphere") return FoldSampling::sphere;
  throw std::invalid_argument("unknown fold sampling: " + std::string(name));
}

std::string_view to_string(FoldSampling sampling) {
  return sampling == FoldSampling::region_uniform ? "region-uniform" : "sphere";
}

ConeStats cone_statistics(Eigen::Index n, Eigen::Index d, Eigen::Index trials, std::uint64_t seed,
                          FoldSampling sampling, double tol) {
  if (n < 1 || d < 1 || trials < 1) throw std::invalid_argument("cone_statistics: need n, d, trials >= 1");
  ConeStats st;
  st.n = n;
  st.d = d;
  st.formula_value = cover_expected(n, d).expected_count;
  double sum = 0.0, sum_sq = 0.0;
  Eigen::Index certified = 0;
  for (Eigen::Index t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d),
                               static_cast<std::uint64_t>(t)}));
    const Matrix inputs = rng.normal_matrix(n, d);
    const Vector v = sampling == FoldSampling::region_uniform ? region_uniform_direction(inputs, rng)
                                                              : sphere_direction(d, rng);
    Eigen::Index count = 0;
    try {
      count = extremal_rays(fold(inputs, v).vectors, tol).count;
    } catch (const UndecidedRay&) {
      ++st.undecided;
      continue;
    }
    sum += static_cast<double>(count);
    sum_sq += static_cast<double>(count) * static_cast<double>(count);
    if (count < n) ++certified;
    ++st.trials;
  }
  if (st.trials > 0) {
    const double m = static_cast<double>(st.trials);
    st.mean_count = sum / m;
    const double var = st.trials > 1 ? std::max(0.0, (sum_sq - m * st.mean_count * st.mean_count) / (m - 1.0)) : 0.0;
    st.stderr_count = std::sqrt(var / m);
    st.certified_fraction = static_cast<double>(certified) / m;
  }
  return st;
}

}  // namespace quadnet
