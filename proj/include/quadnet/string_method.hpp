#pragma once

#include <optional>
#include <vector>

#include "quadnet/model.hpp"

namespace quadnet {

/// Discretized path of Gram matrices from a student start to the teacher.
struct StringPath {
  std::vector<GramMatrix> images;
  std::vector<double> arclengths;  // normalized Frobenius arclength, 0 ... 1
};

/// Straight line A0 + (k/(K-1)) (A* - A0), k = 0..K-1. Throws on K < 2,
/// mismatched sizes or endpoints that are not PSD within 1e-10.
StringPath init_string(const GramMatrix& a0, const GramMatrix& a_star, int images);

/// Normalized Frobenius arclength of the polyline through the images.
std::vector<double> arclengths(const std::vector<GramMatrix>& images);

/// (max gap - min gap) / mean gap over consecutive Frobenius distances.
double gap_spread(const std::vector<GramMatrix>& images);

/// Redistributes the interior images to equal arclength along the current
/// polyline by linear interpolation. Repeats until gap_spread <= tol or
/// max_passes is reached. Endpoints are copied unchanged.
StringPath reparametrize(const std::vector<GramMatrix>& images, double tol = 1e-9,
                         int max_passes = 50);

struct StringOptions {
  double dt = 1e-3;
  long iters = 100000;
  double reparam_tol = 1e-9;
  int max_passes = 50;
  bool track_energy = true;
};

struct RelaxResult {
  StringPath path;
  long iterations = 0;
  double max_gap_spread = 0.0;      // worst spread seen after any reparametrization
  std::vector<double> energy;       // sum_k E_n(image_k), one value per iteration (plus start)
  std::optional<int> diverged_image;  // set when an image blew up; relaxation stops
};

/// Simplified string method: Euler step of dA/dt = -A grad E_n - grad E_n A on
/// every interior image, then reparametrize. Endpoints never move.
RelaxResult relax_string(const StringPath& path, const Dataset& data, const GramMatrix& a_star,
                         const StringOptions& opts);

struct ProfileRow {
  int index;
  double arclength;
  double train_loss;  // E_n
  double gen_loss;    // E
};

std::vector<ProfileRow> string_profile(const StringPath& path, const Dataset& data,
                                       const GramMatrix& a_star);

}  // namespace quadnet
