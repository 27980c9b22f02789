#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "quadnet/cone.hpp"
#include "quadnet/dynamics.hpp"
#include "quadnet/eigenflow.hpp"
#include "quadnet/harness.hpp"
#include "quadnet/string_method.hpp"

namespace quadnet::csv {

void write_trajectory(std::ostream& os, const Trajectory& traj);  // step,t,train_loss,gen_loss
void write_eigen(std::ostream& os, const EigenTrajectory& traj);  // t,lambda_1..lambda_d,loss
void write_reduced(std::ostream& os, const ReducedTrajectory& traj);  // t,lambda,epsilon,loss_approx
void write_string(std::ostream& os, const std::vector<ProfileRow>& rows);  // image_index,arclength,E_n,E
void write_cone(std::ostream& os, const std::vector<ConeStats>& rows);
void write_cells(std::ostream& os, const ResultTable& table);
void write_trials(std::ostream& os, const ResultTable& table);
void write_fit(std::ostream& os, const AlphaFit& fit);

/// Relaxation times for fit_alpha_c: a header row naming `alpha` and
/// `relax_time` (or `relax_median`, as written by write_cells), comma
/// separated. Rows with an empty or non-finite relax time are skipped.
struct RelaxData {
  std::vector<double> alphas;
  std::vector<double> relax_times;
  std::size_t skipped = 0;
};
RelaxData read_relax(std::istream& is);

/// Opens `path` for writing, creating parent directories; throws on failure.
void write_file(const std::string& path, const std::string& contents);

}  // namespace quadnet::csv
