#include "quadnet/csv.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace quadnet::csv {

namespace {

void setup(std::ostream& os) { os << std::setprecision(12); }

template <class T>
void opt(std::ostream& os, const std::optional<T>& v) {
  if (v) os << *v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  setup(os);
  os << "step,t,train_loss,gen_loss\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.steps[i] << ',' << traj.times[i] << ',';
    if (i < traj.train_loss.size()) os << traj.train_loss[i];
    os << ',' << traj.gen_loss[i] << '\n';
  }
}

void write_eigen(std::ostream& os, const EigenTrajectory& traj) {
  setup(os);
  os << 't';
  const Eigen::Index d = traj.lambdas.empty() ? 0 : traj.lambdas.front().size();
  for (Eigen::Index i = 1; i <= d; ++i) os << ",lambda_" << i;
  os << ",loss\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k];
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << traj.lambdas[k](i);
    os << ',' << traj.loss[k] << '\n';
  }
}

void write_reduced(std::ostream& os, const ReducedTrajectory& traj) {
  setup(os);
  os << "t,lambda,epsilon,loss_approx\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    os << traj.times[k] << ',' << traj.lambda[k] << ',' << traj.epsilon[k] << ',' << traj.loss_approx[k] << '\n';
}

void write_string(std::ostream& os, const std::vector<ProfileRow>& rows) {
  setup(os);
  os << "image_index,arclength,E_n,E\n";
  for (const auto& r : rows) os << r.index << ',' << r.arclength << ',' << r.train_loss << ',' << r.gen_loss << '\n';
}

void write_cone(std::ostream& os, const std::vector<ConeStats>& rows) {
  setup(os);
  os << "n,d,trials,mean_count,stderr,formula_value\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.d << ',' << r.trials << ',' << r.mean_count << ',' << r.stderr_count << ','
       << r.formula_value << '\n';
}

void write_cells(std::ostream& os, const ResultTable& table) {
  setup(os);
  os << "d,m_star,n,alpha,trials,success,likely_converging,failed,diverged,success_fraction,"
        "relax_q25,relax_median,relax_q75\n";
  for (const auto& r : table.rows) {
    os << r.d << ',' << r.m_star << ',' << r.n << ',' << r.alpha << ',' << r.trials << ',' << r.success << ','
       << r.likely_converging << ',' << r.failed << ',' << r.diverged << ',' << r.success_fraction << ',';
    opt(os, r.relax_q25);
    os << ',';
    opt(os, r.relax_median);
    os << ',';
    opt(os, r.relax_q75);
    os << '\n';
  }
}

void write_trials(std::ostream& os, const ResultTable& table) {
  setup(os);
  os << "cell,trial,seed,status,final_train_loss,final_gen_loss,relax_time,steps_used\n";
  for (const auto& t : table.trials) {
    os << t.cell << ',' << t.trial << ',' << t.seed << ',' << to_string(t.result.status) << ','
       << t.result.final_train_loss << ',' << t.result.final_gen_loss << ',';
    opt(os, t.result.relax_time);
    os << ',' << t.result.steps_used << '\n';
  }
}

void write_fit(std::ostream& os, const AlphaFit& fit) {
  setup(os);
  os << "alpha_c,ci_low,ci_high,theta,intercept,sse,points\n"
     << fit.alpha_c << ',' << fit.ci_low << ',' << fit.ci_high << ',' << fit.theta << ',' << fit.intercept << ','
     << fit.sse << ',' << fit.points << '\n';
}

RelaxData read_relax(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("read_relax: empty input");
  const auto header = split(line);
  std::ptrdiff_t a_col = -1, t_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "alpha") a_col = static_cast<std::ptrdiff_t>(i);
    if (header[i] == "relax_time" || (header[i] == "relax_median" && t_col < 0)) t_col = static_cast<std::ptrdiff_t>(i);
  }
  if (a_col < 0 || t_col < 0) throw std::invalid_argument("read_relax: header needs alpha and relax_time columns");
  RelaxData out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() <= static_cast<std::size_t>(std::max(a_col, t_col)))
      throw std::invalid_argument("read_relax: short row " + std::to_string(row));
    const std::string& tv = cells[static_cast<std::size_t>(t_col)];
    double tau = std::numeric_limits<double>::quiet_NaN();
    if (!tv.empty()) {
      try {
        tau = std::stod(tv);
      } catch (const std::exception&) {
      }
    }
    if (!std::isfinite(tau)) {
      ++out.skipped;
      continue;
    }
    out.alphas.push_back(std::stod(cells[static_cast<std::size_t>(a_col)]));
    out.relax_times.push_back(tau);
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << contents;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace quadnet::csv
