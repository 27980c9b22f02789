#include "quadnet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/minima.hpp>

#include "quadnet/dynamics.hpp"
#include "quadnet/rng.hpp"

namespace quadnet {

StudentInit parse_student_init(std::string_view name) {
  if (name == "random") return StudentInit::random;
  if (name == "teacher") return StudentInit::teacher;
  throw std::invalid_argument("unknown student init: " + std::string(name));
}

Eigen::Index TrialConfig::samples() const {
  if (n) return *n;
  if (alpha) return static_cast<Eigen::Index>(std::floor(*alpha * static_cast<double>(d) + 1e-9));
  throw std::invalid_argument("TrialConfig: set n or alpha");
}

void TrialConfig::validate() const {
  if (d < 1 || m_star < 1) throw std::invalid_argument("TrialConfig: need d >= 1 and m* >= 1");
  if (m < d) throw std::invalid_argument("TrialConfig: need m >= d");
  if (!(eta > 0.0)) throw std::invalid_argument("TrialConfig: eta must be positive");
  if (max_steps < 1 || record_every < 1 || check_every < 1)
    throw std::invalid_argument("TrialConfig: step counts must be positive");
  if (!(gen_threshold > 0.0) || !(ratio_factor > 0.0))
    throw std::invalid_argument("TrialConfig: thresholds must be positive");
  if (samples() < 1) throw std::invalid_argument("TrialConfig: need at least one sample");
  if (init == StudentInit::teacher && m < m_star)
    throw std::invalid_argument("TrialConfig: teacher init needs m >= m*");
}

std::string_view to_string(TrialStatus status) {
  switch (status) {
    case TrialStatus::success: return "success";
    case TrialStatus::likely_converging: return "likely_converging";
    case TrialStatus::failed: return "failed";
    case TrialStatus::diverged: return "diverged";
  }
  return "unknown";
}

WeightMatrix student_at_teacher(const WeightMatrix& teacher, Eigen::Index m) {
  const Eigen::Index m_star = teacher.rows();
  if (m < m_star) throw std::invalid_argument("student_at_teacher: need m >= m*");
  Matrix w = Matrix::Zero(m, teacher.dims());
  w.topRows(m_star) = teacher.weights() * std::sqrt(static_cast<double>(m) / static_cast<double>(m_star));
  return WeightMatrix(std::move(w), 1.0 / static_cast<double>(m));
}

namespace {

bool training_collapsed(const TrialConfig& cfg, double train, double gen) {
  return train <= cfg.gen_threshold * 1e-3 &&
         gen > cfg.ratio_factor * static_cast<double>(cfg.d) * train;
}

}  // namespace

TrialResult run_trial(const TrialConfig& cfg) {
  cfg.validate();
  const WeightMatrix teacher = make_teacher(cfg.d, cfg.m_star, cfg.ensemble, derive_seed(cfg.seed, {0}));
  const Dataset data = sample_dataset(teacher, cfg.samples(), derive_seed(cfg.seed, {1}));
  const GramMatrix a_star = gram(teacher);
  WeightMatrix w = cfg.init == StudentInit::teacher ? student_at_teacher(teacher, cfg.m)
                                                    : make_student(cfg.d, cfg.m, derive_seed(cfg.seed, {2}));

  TrialResult res;
  std::int64_t done = 0;
  while (done < cfg.max_steps) {
    IntegratorConfig ic;
    ic.step = cfg.eta;
    ic.max_steps = std::min(cfg.check_every, cfg.max_steps - done);
    ic.record_every = cfg.record_every;
    ic.stop_threshold = cfg.gen_threshold;
    ic.stop_on = StopMetric::gen_loss;
    const Trajectory traj = gd_weights(w, a_star, data, ic);
    if (traj.size() > 0) {
      res.final_train_loss = traj.train_loss.back();
      res.final_gen_loss = traj.gen_loss.back();
    }
    if (traj.diverged()) {
      res.status = TrialStatus::diverged;
      res.steps_used = done + (traj.size() > 0 ? traj.steps.back() : 0);
      return res;
    }
    const std::int64_t advanced = traj.steps.back();
    if (traj.status == FlowStatus::stopped) {
      res.status = TrialStatus::success;
      res.steps_used = done + advanced;
      res.relax_time = static_cast<double>(res.steps_used) * cfg.eta;
      return res;
    }
    done += advanced;
    w = *traj.terminal_weights;
    if (cfg.stop_on_failure && training_collapsed(cfg, res.final_train_loss, res.final_gen_loss)) break;
  }
  res.steps_used = done;
  res.status = training_collapsed(cfg, res.final_train_loss, res.final_gen_loss) ? TrialStatus::failed
                                                                                 : TrialStatus::likely_converging;
  return res;
}

SweepGrid make_grid(const TrialConfig& base, const std::vector<Eigen::Index>& ds,
                    const std::vector<Eigen::Index>& m_stars, const std::vector<double>& alphas) {
  SweepGrid grid;
  for (Eigen::Index d : ds)
    for (Eigen::Index ms : m_stars)
      for (double a : alphas) {
        TrialConfig c = base;
        c.d = d;
        c.m = std::max(base.m, d);
        c.m_star = ms;
        c.n.reset();
        c.alpha = a;
        grid.cells.push_back(c);
      }
  return grid;
}

unsigned worker_count() {
  if (const char* env = std::getenv("QUADNET_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

ResultTable sweep(const SweepGrid& grid, std::int64_t trials_per_cell, std::uint64_t base_seed,
                  unsigned workers) {
  if (trials_per_cell < 0) throw std::invalid_argument("sweep: negative trial count");
  for (const auto& c : grid.cells) c.validate();
  ResultTable table;
  const std::size_t cells = grid.cells.size();
  const std::size_t total = cells * static_cast<std::size_t>(trials_per_cell);
  table.trials.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto& rec = table.trials[i];
    rec.cell = i / static_cast<std::size_t>(trials_per_cell);
    rec.trial = static_cast<std::int64_t>(i % static_cast<std::size_t>(trials_per_cell));
    rec.seed = derive_seed(base_seed, {rec.cell, static_cast<std::uint64_t>(rec.trial)});
  }

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      auto& rec = table.trials[i];
      TrialConfig cfg = grid.cells[rec.cell];
      cfg.seed = rec.seed;
      rec.result = run_trial(cfg);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(workers ? workers : worker_count(),
                                                            static_cast<unsigned>(std::max<std::size_t>(total, 1))));
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (std::size_t c = 0; c < cells; ++c) {
    const TrialConfig& cfg = grid.cells[c];
    CellSummary row;
    row.d = cfg.d;
    row.m_star = cfg.m_star;
    row.n = cfg.samples();
    row.alpha = cfg.alpha ? *cfg.alpha : static_cast<double>(row.n) / static_cast<double>(cfg.d);
    std::vector<double> relax;
    for (std::int64_t t = 0; t < trials_per_cell; ++t) {
      const auto& r = table.trials[c * static_cast<std::size_t>(trials_per_cell) + static_cast<std::size_t>(t)].result;
      ++row.trials;
      switch (r.status) {
        case TrialStatus::success: ++row.success; break;
        case TrialStatus::likely_converging: ++row.likely_converging; break;
        case TrialStatus::failed: ++row.failed; break;
        case TrialStatus::diverged: ++row.diverged; break;
      }
      if (r.relax_time) relax.push_back(*r.relax_time);
    }
    row.success_fraction = row.trials ? static_cast<double>(row.success) / static_cast<double>(row.trials) : 0.0;
    if (!relax.empty()) {
      std::sort(relax.begin(), relax.end());
      row.relax_q25 = quantile(relax, 0.25);
      row.relax_median = quantile(relax, 0.5);
      row.relax_q75 = quantile(relax, 0.75);
    }
    table.rows.push_back(row);
  }
  return table;
}

namespace {

struct InnerFit {
  double theta, intercept, sse;
};

InnerFit inner_fit(const std::vector<double>& alphas, const std::vector<double>& log_tau, double ac) {
  const std::size_t n = alphas.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(alphas[i] - ac);
    sx += x;
    sy += log_tau[i];
    sxx += x * x;
    sxy += x * log_tau[i];
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  const double slope = denom != 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
  const double icpt = (sy - slope * sx) / nn;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = log_tau[i] - (icpt + slope * std::log(alphas[i] - ac));
    sse += r * r;
  }
  return {-slope, icpt, sse};
}

}  // namespace

AlphaFit fit_alpha_c(const std::vector<double>& alphas, const std::vector<double>& relax_times) {
  const std::size_t n = alphas.size();
  if (n != relax_times.size()) throw std::invalid_argument("fit_alpha_c: alphas and relax times differ in length");
  if (n < 4) throw std::invalid_argument("fit_alpha_c: need at least 4 points, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(alphas[i])) throw std::invalid_argument("fit_alpha_c: non-finite alpha at row " + std::to_string(i));
    if (!std::isfinite(relax_times[i]) || !(relax_times[i] > 0.0))
      throw std::invalid_argument("fit_alpha_c: relax time must be finite and positive at row " + std::to_string(i));
  }
  const bool increasing = alphas[1] > alphas[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (increasing ? !(alphas[i] > alphas[i - 1]) : !(alphas[i] < alphas[i - 1]))
      throw std::invalid_argument("fit_alpha_c: alphas must be strictly monotone (row " + std::to_string(i) + ")");
  }

  std::vector<double> log_tau(n);
  for (std::size_t i = 0; i < n; ++i) log_tau[i] = std::log(relax_times[i]);
  const auto [lo_it, hi_it] = std::minmax_element(alphas.begin(), alphas.end());
  const double amin = *lo_it;
  const double span = *hi_it - amin;

  // Search over u = log(amin - alpha_c).
  const double u_lo = std::log(1e-9 * span);
  const double u_hi = std::log(10.0 * span);
  auto objective = [&](double u) { return inner_fit(alphas, log_tau, amin - std::exp(u)).sse; };
  constexpr int kScan = 400;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double v = objective(u_lo + (u_hi - u_lo) * k / kScan);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  const double a = u_lo + (u_hi - u_lo) * std::max(best - 1, 0) / kScan;
  const double b = u_lo + (u_hi - u_lo) * std::min(best + 1, kScan) / kScan;
  const auto brent = boost::math::tools::brent_find_minima(objective, a, b, std::numeric_limits<double>::digits);

  // Gauss-Newton polish on (alpha_c, theta, c).
  double ac = amin - std::exp(brent.first);
  InnerFit fit = inner_fit(alphas, log_tau, ac);
  double theta = fit.theta, c = fit.intercept, sse = fit.sse;
  auto jacobian = [&](double ac_, double th_) {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
      const double gap = alphas[i] - ac_;
      j(static_cast<Eigen::Index>(i), 0) = th_ / gap;
      j(static_cast<Eigen::Index>(i), 1) = -std::log(gap);
      j(static_cast<Eigen::Index>(i), 2) = 1.0;
    }
    return j;
  };
  auto residuals = [&](double ac_, double th_, double c_) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      r(static_cast<Eigen::Index>(i)) = log_tau[i] - (c_ - th_ * std::log(alphas[i] - ac_));
    return r;
  };
  for (int it = 0; it < 20 && sse > 0.0; ++it) {
    const Eigen::MatrixXd j = jacobian(ac, theta);
    const Eigen::VectorXd step = j.colPivHouseholderQr().solve(residuals(ac, theta, c));
    const double ac_new = ac + step(0);
    if (!(ac_new < amin)) break;
    const double sse_new = residuals(ac_new, theta + step(1), c + step(2)).squaredNorm();
    if (!(sse_new < sse)) break;
    ac = ac_new;
    theta += step(1);
    c += step(2);
    sse = sse_new;
  }

  AlphaFit out;
  out.alpha_c = ac;
  out.theta = theta;
  out.intercept = c;
  out.sse = sse;
  out.points = n;
  const Eigen::MatrixXd j = jacobian(ac, theta);
  const Eigen::Matrix3d jtj = j.transpose() * j;
  const double s2 = sse / static_cast<double>(n - 3);
  const double var = s2 * jtj.inverse()(0, 0);
  const boost::math::students_t dist(static_cast<double>(n - 3));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  const double half = tq * std::sqrt(std::max(var, 0.0));
  out.ci_low = ac - half;
  out.ci_high = ac + half;
  return out;
}

std::vector<double> log_mean(const std::vector<std::vector<double>>& curves) {
  if (curves.empty()) return {};
  const std::size_t len = curves.front().size();
  for (const auto& c : curves)
    if (c.size() != len) throw std::invalid_argument("log_mean: curves differ in length");
  std::vector<double> out(len, 0.0);
  for (const auto& c : curves)
    for (std::size_t i = 0; i < len; ++i) out[i] += std::log(std::max(c[i], 1e-300));
  for (auto& v : out) v = std::exp(v / static_cast<double>(curves.size()));
  return out;
}

std::vector<double> log_mean(const std::vector<std::vector<double>>& times,
                             const std::vector<std::vector<double>>& curves) {
  if (times.size() != curves.size()) throw std::invalid_argument("log_mean: one time grid per curve");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] != times.front()) throw std::invalid_argument("log_mean: time grids differ");
    if (curves[k].size() != times[k].size()) throw std::invalid_argument("log_mean: curve and grid lengths differ");
  }
  return log_mean(curves);
}

}  // namespace quadnet
