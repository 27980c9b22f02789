#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "quadnet/model.hpp"

namespace quadnet {

enum class StudentInit { random, teacher };
StudentInit parse_student_init(std::string_view name);

struct TrialConfig {
  Eigen::Index d = 4;
  Eigen::Index m = 8;
  Eigen::Index m_star = 1;
  std::optional<Eigen::Index> n;  // takes precedence over alpha
  std::optional<double> alpha;    // n = floor(alpha d)
  TeacherEnsemble ensemble = TeacherEnsemble::gaussian_iid;
  double eta = 0.003;
  std::int64_t max_steps = 1000000;
  double gen_threshold = 1e-5;
  double ratio_factor = 1e9;
  std::uint64_t seed = 0;
  std::int64_t record_every = 100;  // relax_time resolution is record_every * eta
  std::int64_t check_every = 10000;  // steps between failure checks
  bool stop_on_failure = true;
  StudentInit init = StudentInit::random;

  Eigen::Index samples() const;
  /// Throws std::invalid_argument on m < d, eta <= 0, missing n/alpha, ...
  void validate() const;
};

enum class TrialStatus { success, likely_converging, failed, diverged };
std::string_view to_string(TrialStatus status);

struct TrialResult {
  TrialStatus status = TrialStatus::likely_converging;
  double final_train_loss = 0.0;
  double final_gen_loss = 0.0;
  std::optional<double> relax_time;
  std::int64_t steps_used = 0;
};

/// Teacher, dataset and student built from seeds derived from cfg.seed, then
/// empirical gradient descent on the weights until the generalization loss
/// crosses gen_threshold, training collapses without generalizing, or the
/// step budget runs out.
TrialResult run_trial(const TrialConfig& cfg);

/// Student whose Gram matrix equals the teacher's: teacher rows scaled by
/// sqrt(m/m*), padded with zero rows up to m.
WeightMatrix student_at_teacher(const WeightMatrix& teacher, Eigen::Index m);

struct SweepGrid {
  std::vector<TrialConfig> cells;  // each cell's seed field is ignored
};

/// Cartesian product d x m* x alpha on top of a template config. m is raised
/// to at least d when the template's m is smaller.
SweepGrid make_grid(const TrialConfig& base, const std::vector<Eigen::Index>& ds,
                    const std::vector<Eigen::Index>& m_stars, const std::vector<double>& alphas);

struct TrialRecord {
  std::size_t cell = 0;
  std::int64_t trial = 0;
  std::uint64_t seed = 0;
  TrialResult result;
};

struct CellSummary {
  Eigen::Index d = 0;
  Eigen::Index m_star = 0;
  Eigen::Index n = 0;
  double alpha = 0.0;
  std::int64_t trials = 0;
  std::int64_t success = 0;
  std::int64_t likely_converging = 0;
  std::int64_t failed = 0;
  std::int64_t diverged = 0;
  double success_fraction = 0.0;
  // Quantiles of relax_time over successful trials.
  std::optional<double> relax_median;
  std::optional<double> relax_q25;
  std::optional<double> relax_q75;
};

struct ResultTable {
  std::vector<CellSummary> rows;     // grid order
  std::vector<TrialRecord> trials;   // sorted by (cell, trial)
};

/// Worker count from QUADNET_WORKERS, defaulting to the hardware concurrency.
unsigned worker_count();

/// Runs trials_per_cell trials per cell with seed = derive_seed(base_seed,
/// {cell, trial}). Trials run concurrently on `workers` threads (0 selects
/// worker_count()); the table does not depend on the worker count.
ResultTable sweep(const SweepGrid& grid, std::int64_t trials_per_cell, std::uint64_t base_seed,
                  unsigned workers = 0);

struct AlphaFit {
  double alpha_c = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double theta = 0.0;
  double intercept = 0.0;  // c in log tau = -theta log(alpha - alpha_c) + c
  double sse = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of tau ~ exp(c) (alpha - alpha_c)^(-theta). alpha_c is
/// searched below min(alphas); theta and c solve the inner linear problem. The
/// 95% interval on alpha_c uses the linearized covariance and a Student t
/// quantile with N - 3 degrees of freedom.
AlphaFit fit_alpha_c(const std::vector<double>& alphas, const std::vector<double>& relax_times);

/// Pointwise geometric mean, values below 1e-300 floored before the log.
std::vector<double> log_mean(const std::vector<std::vector<double>>& curves);

/// Same, checking that every curve shares the first curve's time grid.
std::vector<double> log_mean(const std::vector<std::vector<double>>& times,
                             const std::vector<std::vector<double>>& curves);

}  // namespace quadnet
