#include "quadnet/string_method.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "quadnet/losses.hpp"
#include "quadnet/ode.hpp"

namespace quadnet {

namespace {

// Images stored one per row, each the row-major flattening of a d x d matrix.
using Flat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Flat flatten(const std::vector<GramMatrix>& images) {
  const Eigen::Index d = images.front().dims();
  Flat f(static_cast<Eigen::Index>(images.size()), d * d);
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (images[k].dims() != d) throw std::invalid_argument("string: image dimension mismatch");
    f.row(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::RowVectorXd>(images[k].matrix().data(), d * d);
  }
  return f;
}

std::vector<GramMatrix> unflatten(const Flat& f, Eigen::Index d) {
  std::vector<GramMatrix> out;
  out.reserve(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index k = 0; k < f.rows(); ++k)
    out.emplace_back(symmetrized(Eigen::Map<const Matrix>(f.row(k).data(), d, d)));
  return out;
}

Eigen::VectorXd flat_gaps(const Flat& f) {
  const Eigen::Index k = f.rows();
  Eigen::VectorXd g(k - 1);
  for (Eigen::Index i = 0; i + 1 < k; ++i) g(i) = (f.row(i + 1) - f.row(i)).norm();
  return g;
}

double flat_spread(const Flat& f) {
  if (f.rows() < 3) return 0.0;
  const Eigen::VectorXd g = flat_gaps(f);
  const double mean = g.mean();
  return mean > 0.0 ? (g.maxCoeff() - g.minCoeff()) / mean : 0.0;
}

std::vector<double> flat_arclengths(const Flat& f) {
  std::vector<double> s(static_cast<std::size_t>(f.rows()), 0.0);
  if (f.rows() < 2) return s;
  const Eigen::VectorXd g = flat_gaps(f);
  for (Eigen::Index i = 0; i < g.size(); ++i) s[static_cast<std::size_t>(i + 1)] = s[static_cast<std::size_t>(i)] + g(i);
  const double total = s.back();
  if (total > 0.0)
    for (auto& v : s) v /= total;
  return s;
}

// One equal-arclength redistribution of the interior rows; returns the new spread.
void flat_reparametrize(Flat& f, double tol, int max_passes) {
  const Eigen::Index count = f.rows();
  Flat next(f.rows(), f.cols());
  for (int pass = 0; pass < max_passes && flat_spread(f) > tol; ++pass) {
    const auto s = flat_arclengths(f);
    next.row(0) = f.row(0);
    next.row(count - 1) = f.row(count - 1);
    Eigen::Index seg = 0;
    for (Eigen::Index k = 1; k + 1 < count; ++k) {
      const double target = static_cast<double>(k) / static_cast<double>(count - 1);
      while (seg + 2 < count && s[static_cast<std::size_t>(seg + 1)] < target) ++seg;
      const double lo = s[static_cast<std::size_t>(seg)];
      const double width = s[static_cast<std::size_t>(seg + 1)] - lo;
      const double w = width > 0.0 ? std::clamp((target - lo) / width, 0.0, 1.0) : 0.0;
      next.row(k) = (1.0 - w) * f.row(seg) + w * f.row(seg + 1);
    }
    f.swap(next);
  }
}

std::vector<double> gaps_of(const std::vector<GramMatrix>& images) {
  const Eigen::VectorXd g = flat_gaps(flatten(images));
  return {g.data(), g.data() + g.size()};
}

}  // namespace

StringPath init_string(const GramMatrix& a0, const GramMatrix& a_star, int images) {
  if (images < 2) throw std::invalid_argument("init_string: need at least 2 images");
  if (a0.dims() != a_star.dims()) throw std::invalid_argument("init_string: dimension mismatch");
  if (a0.min_eigenvalue() < -1e-10 || a_star.min_eigenvalue() < -1e-10)
    throw std::invalid_argument("init_string: endpoints must be PSD");
  StringPath p;
  p.images.reserve(static_cast<std::size_t>(images));
  p.images.push_back(a0);
  for (int k = 1; k + 1 < images; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(images - 1);
    p.images.emplace_back(symmetrized(a0.matrix() + s * (a_star.matrix() - a0.matrix())));
  }
  p.images.push_back(a_star);
  p.arclengths = arclengths(p.images);
  return p;
}

std::vector<double> arclengths(const std::vector<GramMatrix>& images) {
  if (images.empty()) return {};
  return flat_arclengths(flatten(images));
}

double gap_spread(const std::vector<GramMatrix>& images) {
  if (images.size() < 3) return 0.0;
  const auto g = gaps_of(images);
  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(g.size());
  return mean > 0.0 ? (*hi - *lo) / mean : 0.0;
}

StringPath reparametrize(const std::vector<GramMatrix>& images, double tol, int max_passes) {
  if (images.size() < 2) throw std::invalid_argument("reparametrize: need at least 2 images");
  const Eigen::Index d = images.front().dims();
  Flat f = flatten(images);
  flat_reparametrize(f, tol, max_passes);
  StringPath p;
  p.images = unflatten(f, d);
  p.images.front() = images.front();
  p.images.back() = images.back();
  p.arclengths = flat_arclengths(f);
  return p;
}

RelaxResult relax_string(const StringPath& path, const Dataset& data, const GramMatrix& a_star,
                         const StringOptions& opts) {
  if (path.images.size() < 2) throw std::invalid_argument("relax_string: need at least 2 images");
  if (!(opts.dt > 0.0) || opts.iters < 0) throw std::invalid_argument("relax_string: bad dt or iters");
  const Eigen::Index d = a_star.dims();
  if (data.dims() != d) throw std::invalid_argument("relax_string: data dimension mismatch");
  if (path.images.front().dims() != d) throw std::invalid_argument("relax_string: image dimension mismatch");

  RelaxResult res;
  res.path = path;
  if (opts.iters == 0) return res;

  Flat f = flatten(path.images);
  const Eigen::Index count = f.rows();
  const Matrix& target = a_star.matrix();
  auto energy = [&]() {
    double e = 0.0;
    for (Eigen::Index k = 0; k < count; ++k)
      e += detail::empirical_loss(Eigen::Map<const Matrix>(f.row(k).data(), d, d) - target, data.inputs());
    return e;
  };
  if (opts.track_energy) res.energy.push_back(energy());

  Matrix a(d, d), next(d, d);
  for (long it = 0; it < opts.iters; ++it) {
    for (Eigen::Index k = 1; k + 1 < count; ++k) {
      a = Eigen::Map<const Matrix>(f.row(k).data(), d, d);
      const Matrix g = detail::empirical_descent(target - a, data.inputs());
      next = a + opts.dt * (g * a + a * g);
      next = symmetrized(next);
      if (!next.allFinite() || next.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
        res.diverged_image = static_cast<int>(k);
        res.iterations = it;
        res.path.images = unflatten(f, d);
        res.path.images.front() = path.images.front();
        res.path.images.back() = path.images.back();
        res.path.arclengths = flat_arclengths(f);
        return res;
      }
      f.row(k) = Eigen::Map<const Eigen::RowVectorXd>(next.data(), d * d);
    }
    flat_reparametrize(f, opts.reparam_tol, opts.max_passes);
    res.max_gap_spread = std::max(res.max_gap_spread, flat_spread(f));
    if (opts.track_energy) res.energy.push_back(energy());
    res.iterations = it + 1;
  }
  res.path.images = unflatten(f, d);
  res.path.images.front() = path.images.front();
  res.path.images.back() = path.images.back();
  res.path.arclengths = flat_arclengths(f);
  return res;
}

std::vector<ProfileRow> string_profile(const StringPath& path, const Dataset& data,
                                       const GramMatrix& a_star) {
  std::vector<ProfileRow> rows;
  const auto s = path.arclengths.size() == path.images.size() ? path.arclengths : arclengths(path.images);
  for (std::size_t k = 0; k < path.images.size(); ++k) {
    const Matrix diff = path.images[k].matrix() - a_star.matrix();
    rows.push_back({static_cast<int>(k), s[k], detail::empirical_loss(diff, data.inputs()),
                    detail::population_loss(diff)});
  }
  return rows;
}

}  // namespace quadnet
