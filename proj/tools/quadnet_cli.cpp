// Command-line driver: one subcommand per experiment, CSV data files plus a
// JSON run summary.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadnet/cone.hpp"
#include "quadnet/csv.hpp"
#include "quadnet/dynamics.hpp"
#include "quadnet/eigenflow.hpp"
#include "quadnet/harness.hpp"
#include "quadnet/losses.hpp"
#include "quadnet/model.hpp"
#include "quadnet/rate.hpp"
#include "quadnet/rng.hpp"
#include "quadnet/string_method.hpp"

#ifndef QUADNET_VERSION
#define QUADNET_VERSION "0.1.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace quadnet;

namespace {

struct Run {
  std::string command;
  json config = json::object();
  json results = json::object();
  std::map<std::string, long> status_counts;
  std::string summary_path;  // empty: print to stdout
};

std::string to_csv(const std::function<void(std::ostream&)>& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::int64_t steps_for(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("--dt and --T must be positive");
  return static_cast<std::int64_t>(std::llround(horizon / dt));
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
    throw std::invalid_argument("--alpha expects START:STOP:STEP with STEP > 0");
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
  for (long k = 0; k <= count; ++k) out.push_back(parts[0] + static_cast<double>(k) * parts[2]);
  return out;
}

json rate_json(const RateReport& r) {
  json j{{"decay_class", std::string(to_string(r.decay_class))},
         {"bound_ok", r.bound_ok},
         {"bound_constant", r.bound_constant},
         {"power_exponent", r.power_exponent},
         {"tail_points", r.tail_points}};
  if (r.plateau) j["plateau"] = *r.plateau;
  if (r.rate) j["rate"] = *r.rate;
  return j;
}

std::string default_summary(const std::string& out, bool is_dir) {
  if (out.empty()) return "";
  return is_dir ? (fs::path(out) / "summary.json").string() : out + ".json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-student dynamics of quadratic networks"};
  app.set_config("--config", "", "INI/TOML file whose keys mirror the flags; command-line values win");
  app.set_version_flag("--version", std::string(QUADNET_VERSION));
  app.require_subcommand(1);
  std::string summary_override;
  app.add_option("--summary", summary_override, "Path of the JSON run summary");

  Run run;

  // gd
  TrialConfig gd_cfg;
  long gd_n = 0;
  double gd_alpha = 0.0;
  std::string gd_ensemble = "gaussian", gd_out, gd_init = "random", gd_loss = "empirical";
  std::int64_t gd_record = 100;
  auto* gd = app.add_subcommand("gd", "Gradient descent on the student weights");
  gd->add_option("--d", gd_cfg.d, "Input dimension")->required();
  gd->add_option("--m", gd_cfg.m, "Student width (>= d)")->required();
  gd->add_option("--mstar", gd_cfg.m_star, "Teacher width")->required();
  auto* gd_n_opt = gd->add_option("--n", gd_n, "Number of samples");
  gd->add_option("--alpha", gd_alpha, "Samples per dimension, n = floor(alpha d)")->excludes(gd_n_opt);
  gd->add_option("--ensemble", gd_ensemble, "gaussian|orthonormal");
  gd->add_option("--eta", gd_cfg.eta, "Learning rate");
  gd->add_option("--steps", gd_cfg.max_steps, "Step budget");
  gd->add_option("--seed", gd_cfg.seed, "Base seed");
  gd->add_option("--record-every", gd_record, "Steps between records");
  gd->add_option("--threshold", gd_cfg.gen_threshold, "Stop once the generalization loss falls below");
  gd->add_option("--init", gd_init, "random|teacher");
  gd->add_option("--loss", gd_loss, "empirical|population");
  gd->add_option("--out", gd_out, "Trajectory CSV");

  // eigenflow
  long ef_d = 0, ef_mstar = 0;
  std::uint64_t ef_seed = 0;
  double ef_dt = 1e-3, ef_T = 10.0;
  std::string ef_ensemble = "orthonormal", ef_method = "rk4", ef_out;
  std::int64_t ef_record = 10;
  auto* ef = app.add_subcommand("eigenflow", "Population flow in the teacher eigenbasis");
  ef->add_option("--d", ef_d)->required();
  ef->add_option("--mstar", ef_mstar)->required();
  ef->add_option("--ensemble", ef_ensemble, "gaussian|orthonormal");
  ef->add_option("--seed", ef_seed, "Teacher seed");
  ef->add_option("--dt", ef_dt);
  ef->add_option("--T", ef_T, "Time horizon");
  ef->add_option("--method", ef_method, "euler|rk4");
  ef->add_option("--record-every", ef_record);
  ef->add_option("--out", ef_out, "Eigenvalue CSV");

  // reduced
  long rd_d = 0, rd_mstar = 0;
  double rd_dt = 1e-3, rd_T = 10.0;
  std::string rd_method = "rk4", rd_out;
  std::int64_t rd_record = 10;
  auto* rd = app.add_subcommand("reduced", "Two-variable informative/non-informative flow");
  rd->add_option("--d", rd_d)->required();
  rd->add_option("--mstar", rd_mstar)->required();
  rd->add_option("--dt", rd_dt);
  rd->add_option("--T", rd_T);
  rd->add_option("--method", rd_method, "euler|rk4");
  rd->add_option("--record-every", rd_record);
  rd->add_option("--out", rd_out, "Reduced-flow CSV");

  // lv-report
  long lv_d = 0, lv_mstar = 0;
  auto* lv = app.add_subcommand("lv-report", "Fixed points and timescales of the reduced flow");
  lv->add_option("--d", lv_d)->required();
  lv->add_option("--mstar", lv_mstar)->required();

  // string
  long st_d = 0, st_mstar = 1, st_n = 0, st_images = 100, st_seeds = 10, st_m = 0;
  double st_dt = 1e-3;
  long st_iters = 100000;
  std::uint64_t st_seed = 0;
  std::string st_out, st_init = "identity";
  auto* st = app.add_subcommand("string", "String method between student and teacher");
  st->add_option("--d", st_d)->required();
  st->add_option("--mstar", st_mstar);
  st->add_option("--n", st_n)->required();
  st->add_option("--images", st_images);
  st->add_option("--dt", st_dt);
  st->add_option("--iters", st_iters);
  st->add_option("--seeds", st_seeds, "Independent teacher/data draws");
  st->add_option("--seed", st_seed, "Base seed");
  st->add_option("--init", st_init, "identity|student (student uses --m)");
  st->add_option("--m", st_m, "Student width for --init student (default 2d)");
  st->add_option("--out", st_out, "Output directory")->required();

  // cone
  long cn_d = 0, cn_trials = 200;
  std::vector<long> cn_n;
  std::uint64_t cn_seed = 0;
  double cn_tol = 1e-9;
  std::string cn_out, cn_sampling = "region";
  auto* cn = app.add_subcommand("cone", "Monte Carlo extremal-ray counts of folded Gaussian sets");
  cn->add_option("--d", cn_d)->required();
  cn->add_option("--n", cn_n, "Sample counts (comma separated)")->required()->delimiter(',');
  cn->add_option("--trials", cn_trials);
  cn->add_option("--seed", cn_seed);
  cn->add_option("--sampling", cn_sampling, "region|sphere fold direction");
  cn->add_option("--tol", cn_tol, "Relative NNLS residual tolerance");
  cn->add_option("--out", cn_out, "Cone statistics CSV");

  // cone-expected
  long ce_d = 0, ce_n = 0;
  auto* ce = app.add_subcommand("cone-expected", "Cover's expected number of extremal rays");
  ce->add_option("--d", ce_d)->required();
  ce->add_option("--n", ce_n)->required();

  // phase
  std::vector<long> ph_d, ph_mstar;
  std::string ph_alpha, ph_out, ph_ensemble = "gaussian";
  TrialConfig ph_cfg;
  long ph_trials = 20;
  unsigned ph_workers = 0;
  std::uint64_t ph_seed = 0;
  auto* ph = app.add_subcommand("phase", "Success-fraction sweep over (d, m*, alpha)");
  ph->add_option("--d", ph_d, "Dimensions (comma separated)")->required()->delimiter(',');
  ph->add_option("--mstar", ph_mstar, "Teacher widths (comma separated)")->required()->delimiter(',');
  ph->add_option("--alpha", ph_alpha, "START:STOP:STEP")->required();
  ph->add_option("--m", ph_cfg.m, "Student width, raised to d when smaller");
  ph->add_option("--trials", ph_trials);
  ph->add_option("--eta", ph_cfg.eta);
  ph->add_option("--steps", ph_cfg.max_steps);
  ph->add_option("--seed", ph_seed);
  ph->add_option("--threshold", ph_cfg.gen_threshold);
  ph->add_option("--ratio-factor", ph_cfg.ratio_factor);
  ph->add_option("--record-every", ph_cfg.record_every);
  ph->add_option("--ensemble", ph_ensemble);
  ph->add_option("--workers", ph_workers, "Worker threads (default QUADNET_WORKERS)");
  ph->add_option("--out", ph_out, "Output directory")->required();

  // fit-alpha-c
  std::string fa_in, fa_out;
  auto* fa = app.add_subcommand("fit-alpha-c", "Power-law extrapolation of the critical alpha");
  fa->add_option("--in", fa_in, "CSV with alpha and relax_time columns")->required()->check(CLI::ExistingFile);
  fa->add_option("--out", fa_out, "Fit CSV");

  // prox
  long px_d = 0, px_mstar = 1, px_n = 0;
  double px_tau = 1e-3;
  std::int64_t px_steps = 1000, px_record = 1;
  std::uint64_t px_seed = 0;
  std::string px_out, px_solver = "first-order";
  auto* px = app.add_subcommand("prox", "Proximal iteration in the factor B, A = B B^T, from A = Id");
  px->add_option("--d", px_d)->required();
  px->add_option("--mstar", px_mstar);
  px->add_option("--n", px_n)->required();
  px->add_option("--tau", px_tau);
  px->add_option("--steps", px_steps);
  px->add_option("--seed", px_seed);
  px->add_option("--solver", px_solver, "first-order|implicit");
  px->add_option("--record-every", px_record);
  px->add_option("--out", px_out, "Trajectory CSV");

  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  try {
    if (*gd) {
      run.command = "gd";
      if (gd_n > 0) gd_cfg.n = gd_n;
      else if (gd_alpha > 0.0) gd_cfg.alpha = gd_alpha;
      else throw std::invalid_argument("gd: give --n or --alpha");
      gd_cfg.ensemble = parse_ensemble(gd_ensemble);
      gd_cfg.init = parse_student_init(gd_init);
      gd_cfg.validate();
      const WeightMatrix teacher = make_teacher(gd_cfg.d, gd_cfg.m_star, gd_cfg.ensemble, derive_seed(gd_cfg.seed, {0}));
      const Dataset data = sample_dataset(teacher, gd_cfg.samples(), derive_seed(gd_cfg.seed, {1}));
      const WeightMatrix w0 = gd_cfg.init == StudentInit::teacher
                                  ? student_at_teacher(teacher, gd_cfg.m)
                                  : make_student(gd_cfg.d, gd_cfg.m, derive_seed(gd_cfg.seed, {2}));
      IntegratorConfig ic;
      ic.step = gd_cfg.eta;
      ic.max_steps = gd_cfg.max_steps;
      ic.record_every = gd_record;
      ic.stop_threshold = gd_cfg.gen_threshold;
      Trajectory traj;
      if (gd_loss == "empirical") traj = gd_weights(w0, gram(teacher), data, ic);
      else if (gd_loss == "population") traj = gd_weights(w0, gram(teacher), ic);
      else throw std::invalid_argument("gd: --loss must be empirical or population");
      if (!gd_out.empty()) csv::write_file(gd_out, to_csv([&](std::ostream& os) { csv::write_trajectory(os, traj); }));
      run.config = {{"d", gd_cfg.d}, {"m", gd_cfg.m}, {"mstar", gd_cfg.m_star}, {"n", gd_cfg.samples()},
                    {"ensemble", gd_ensemble}, {"eta", gd_cfg.eta}, {"steps", gd_cfg.max_steps},
                    {"seed", gd_cfg.seed}, {"record_every", gd_record}, {"threshold", gd_cfg.gen_threshold},
                    {"init", gd_init}, {"loss", gd_loss}, {"out", gd_out}};
      run.results = {{"records", traj.size()}, {"final_gen_loss", traj.gen_loss.back()},
                     {"final_step", traj.steps.back()}};
      if (!traj.train_loss.empty()) run.results["final_train_loss"] = traj.train_loss.back();
      if (traj.size() >= 3) run.results["rate"] = rate_json(rate_diagnostics(traj));
      run.status_counts[std::string(to_string(traj.status))] = 1;
      run.summary_path = default_summary(gd_out, false);
    } else if (*ef) {
      run.command = "eigenflow";
      const WeightMatrix teacher = make_teacher(ef_d, ef_mstar, parse_ensemble(ef_ensemble), ef_seed);
      const Vector spectrum = teacher_spectrum(gram(teacher));
      IntegratorConfig ic;
      ic.step = ef_dt;
      ic.max_steps = steps_for(ef_T, ef_dt);
      ic.record_every = ef_record;
      ic.method = parse_method(ef_method);
      const EigenTrajectory traj = eigen_flow(spectrum, ic);
      if (!ef_out.empty()) csv::write_file(ef_out, to_csv([&](std::ostream& os) { csv::write_eigen(os, traj); }));
      run.config = {{"d", ef_d}, {"mstar", ef_mstar}, {"ensemble", ef_ensemble}, {"seed", ef_seed},
                    {"dt", ef_dt}, {"T", ef_T}, {"method", ef_method}, {"record_every", ef_record}, {"out", ef_out}};
      run.results = {{"records", traj.times.size()}, {"final_loss", traj.loss.back()},
                     {"teacher_spectrum", std::vector<double>(spectrum.data(), spectrum.data() + spectrum.size())}};
      if (traj.times.size() >= 3) run.results["rate"] = rate_json(rate_diagnostics(traj.times, traj.loss));
      run.status_counts[std::string(to_string(traj.status))] = 1;
      run.summary_path = default_summary(ef_out, false);
    } else if (*rd) {
      run.command = "reduced";
      IntegratorConfig ic;
      ic.step = rd_dt;
      ic.max_steps = steps_for(rd_T, rd_dt);
      ic.record_every = rd_record;
      ic.method = parse_method(rd_method);
      const ReducedTrajectory traj = reduced_flow(rd_d, rd_mstar, ic);
      if (!rd_out.empty()) csv::write_file(rd_out, to_csv([&](std::ostream& os) { csv::write_reduced(os, traj); }));
      run.config = {{"d", rd_d}, {"mstar", rd_mstar}, {"dt", rd_dt}, {"T", rd_T}, {"method", rd_method},
                    {"record_every", rd_record}, {"out", rd_out}};
      run.results = {{"records", traj.times.size()}, {"final_lambda", traj.lambda.back()},
                     {"final_epsilon", traj.epsilon.back()}, {"final_loss", traj.loss.back()}};
      run.status_counts[std::string(to_string(traj.status))] = 1;
      run.summary_path = default_summary(rd_out, false);
    } else if (*lv) {
      run.command = "lv-report";
      const LVReport r = lv_analysis(lv_d, lv_mstar);
      json fps = json::array();
      for (const auto& [l, e] : r.fixed_points) fps.push_back({l, e});
      run.config = {{"d", lv_d}, {"mstar", lv_mstar}};
      run.results = {{"fixed_points", fps}};
      if (r.t0) run.results["t0"] = *r.t0;
      if (r.t_j) run.results["tJ"] = *r.t_j;
      if (r.lambda_t0) run.results["lambda_t0"] = *r.lambda_t0;
      if (r.loss_tail_quadratic) run.results["loss_tail_quadratic"] = *r.loss_tail_quadratic;
      if (r.loss_tail_exponential) run.results["loss_tail_exponential_rate"] = *r.loss_tail_exponential;
      run.status_counts["ok"] = 1;
    } else if (*st) {
      run.command = "string";
      if (st_seeds < 1) throw std::invalid_argument("string: --seeds must be >= 1");
      StringOptions so;
      so.dt = st_dt;
      so.iters = st_iters;
      so.track_energy = false;
      std::vector<std::vector<double>> en_curves, e_curves;
      std::vector<double> arc;
      json per_seed = json::array();
      for (long s = 0; s < st_seeds; ++s) {
        const auto k = static_cast<std::uint64_t>(s);
        const WeightMatrix teacher = make_teacher(st_d, st_mstar, TeacherEnsemble::gaussian_iid, derive_seed(st_seed, {k, 0}));
        const GramMatrix a_star = gram(teacher);
        const Dataset data = sample_dataset(teacher, st_n, derive_seed(st_seed, {k, 1}));
        GramMatrix a0 = GramMatrix::identity(st_d);
        if (st_init == "student") a0 = gram(make_student(st_d, st_m > 0 ? st_m : 2 * st_d, derive_seed(st_seed, {k, 2})));
        else if (st_init != "identity") throw std::invalid_argument("string: --init must be identity or student");
        const RelaxResult rr = relax_string(init_string(a0, a_star, static_cast<int>(st_images)), data, a_star, so);
        const auto prof = string_profile(rr.path, data, a_star);
        csv::write_file((fs::path(st_out) / ("string_seed_" + std::to_string(s) + ".csv")).string(),
                        to_csv([&](std::ostream& os) { csv::write_string(os, prof); }));
        std::vector<double> en, e;
        for (const auto& row : prof) {
          en.push_back(row.train_loss);
          e.push_back(row.gen_loss);
        }
        en_curves.push_back(en);
        e_curves.push_back(e);
        if (arc.empty()) arc.assign(prof.size(), 0.0);
        for (std::size_t i = 0; i < prof.size(); ++i) arc[i] += prof[i].arclength / static_cast<double>(st_seeds);
        per_seed.push_back({{"seed", s}, {"iterations", rr.iterations}, {"max_gap_spread", rr.max_gap_spread},
                            {"diverged_image", rr.diverged_image ? json(*rr.diverged_image) : json(nullptr)}});
        ++run.status_counts[rr.diverged_image ? "diverged" : "completed"];
      }
      const auto en_mean = log_mean(en_curves);
      const auto e_mean = log_mean(e_curves);
      std::vector<ProfileRow> agg;
      for (std::size_t i = 0; i < en_mean.size(); ++i) agg.push_back({static_cast<int>(i), arc[i], en_mean[i], e_mean[i]});
      csv::write_file((fs::path(st_out) / "string_logmean.csv").string(),
                      to_csv([&](std::ostream& os) { csv::write_string(os, agg); }));
      run.config = {{"d", st_d}, {"mstar", st_mstar}, {"n", st_n}, {"images", st_images}, {"dt", st_dt},
                    {"iters", st_iters}, {"seeds", st_seeds}, {"seed", st_seed}, {"init", st_init}, {"out", st_out}};
      run.results = {{"seeds", per_seed}};
      run.summary_path = default_summary(st_out, true);
    } else if (*cn) {
      run.command = "cone";
      std::vector<ConeStats> rows;
      json res = json::array();
      for (long n : cn_n) {
        const ConeStats s = cone_statistics(n, cn_d, cn_trials, cn_seed, parse_fold_sampling(cn_sampling), cn_tol);
        rows.push_back(s);
        res.push_back({{"n", n}, {"mean_count", s.mean_count}, {"stderr", s.stderr_count},
                       {"formula_value", s.formula_value}, {"certified_fraction", s.certified_fraction},
                       {"undecided", s.undecided}});
        run.status_counts["decided"] += s.trials;
        run.status_counts["undecided"] += s.undecided;
      }
      if (!cn_out.empty()) csv::write_file(cn_out, to_csv([&](std::ostream& os) { csv::write_cone(os, rows); }));
      else csv::write_cone(std::cout, rows);
      run.config = {{"d", cn_d}, {"n", cn_n}, {"trials", cn_trials}, {"seed", cn_seed},
                    {"sampling", cn_sampling}, {"tol", cn_tol}, {"out", cn_out}};
      run.results = {{"rows", res}};
      run.summary_path = default_summary(cn_out, false);
    } else if (*ce) {
      run.command = "cone-expected";
      const CoverValue v = cover_expected(ce_n, ce_d);
      run.config = {{"d", ce_d}, {"n", ce_n}};
      run.results = {{"expected_count", v.expected_count},
                     {"C_table", v.c_table.str()},
                     {"limit_per_d", cover_limit(static_cast<double>(ce_n) / static_cast<double>(ce_d))}};
      run.status_counts["ok"] = 1;
    } else if (*ph) {
      run.command = "phase";
      ph_cfg.ensemble = parse_ensemble(ph_ensemble);
      std::vector<Eigen::Index> ds(ph_d.begin(), ph_d.end()), ms(ph_mstar.begin(), ph_mstar.end());
      const auto alphas = parse_range(ph_alpha);
      const SweepGrid grid = make_grid(ph_cfg, ds, ms, alphas);
      const ResultTable table = sweep(grid, ph_trials, ph_seed, ph_workers);
      csv::write_file((fs::path(ph_out) / "cells.csv").string(), to_csv([&](std::ostream& os) { csv::write_cells(os, table); }));
      csv::write_file((fs::path(ph_out) / "trials.csv").string(), to_csv([&](std::ostream& os) { csv::write_trials(os, table); }));
      for (const auto& t : table.trials) ++run.status_counts[std::string(to_string(t.result.status))];
      run.config = {{"d", ph_d}, {"mstar", ph_mstar}, {"alpha", ph_alpha}, {"m", ph_cfg.m}, {"trials", ph_trials},
                    {"eta", ph_cfg.eta}, {"steps", ph_cfg.max_steps}, {"seed", ph_seed},
                    {"threshold", ph_cfg.gen_threshold}, {"ratio_factor", ph_cfg.ratio_factor},
                    {"record_every", ph_cfg.record_every}, {"ensemble", ph_ensemble},
                    {"workers", ph_workers ? ph_workers : worker_count()}, {"out", ph_out}};
      run.results = {{"cells", table.rows.size()}, {"trials", table.trials.size()}};
      run.summary_path = default_summary(ph_out, true);
    } else if (*fa) {
      run.command = "fit-alpha-c";
      std::ifstream in(fa_in);
      const csv::RelaxData data = csv::read_relax(in);
      const AlphaFit fit = fit_alpha_c(data.alphas, data.relax_times);
      if (!fa_out.empty()) csv::write_file(fa_out, to_csv([&](std::ostream& os) { csv::write_fit(os, fit); }));
      else csv::write_fit(std::cout, fit);
      run.config = {{"in", fa_in}, {"out", fa_out}};
      run.results = {{"alpha_c", fit.alpha_c}, {"ci95", {fit.ci_low, fit.ci_high}}, {"theta", fit.theta},
                     {"sse", fit.sse}, {"points", fit.points}, {"skipped_rows", data.skipped}};
      run.status_counts["ok"] = 1;
      run.summary_path = default_summary(fa_out, false);
    } else if (*px) {
      run.command = "prox";
      const WeightMatrix teacher = make_teacher(px_d, px_mstar, TeacherEnsemble::gaussian_iid, derive_seed(px_seed, {0}));
      const GramMatrix a_star = gram(teacher);
      const Dataset data = sample_dataset(teacher, px_n, derive_seed(px_seed, {1}));
      ProximalOptions po;
      po.record_every = px_record;
      if (px_solver == "implicit") po.solver = ProximalSolver::implicit;
      else if (px_solver != "first-order") throw std::invalid_argument("prox: --solver must be first-order or implicit");
      const Trajectory prox = proximal_flow(Matrix::Identity(px_d, px_d), a_star, data, px_tau, px_steps, po);
      IntegratorConfig ic;
      ic.step = px_tau;
      ic.max_steps = std::max<std::int64_t>(px_steps, 1);
      ic.record_every = px_record;
      ic.keep_snapshots = true;
      const Trajectory flow = flow_gram(GramMatrix::identity(px_d), a_star, data, ic);
      double deviation = 0.0;
      for (std::size_t i = 0; i < std::min(prox.snapshots.size(), flow.snapshots.size()); ++i)
        deviation = std::max(deviation, (prox.snapshots[i].matrix() - flow.snapshots[i].matrix()).norm());
      if (!px_out.empty()) csv::write_file(px_out, to_csv([&](std::ostream& os) { csv::write_trajectory(os, prox); }));
      run.config = {{"d", px_d}, {"mstar", px_mstar}, {"n", px_n}, {"tau", px_tau}, {"steps", px_steps},
                    {"seed", px_seed}, {"solver", px_solver}, {"record_every", px_record}, {"out", px_out}};
      run.results = {{"records", prox.size()}, {"final_train_loss", prox.train_loss.back()},
                     {"final_gen_loss", prox.gen_loss.back()}, {"max_deviation_from_flow", deviation}};
      run.status_counts[std::string(to_string(prox.status))] = 1;
      run.summary_path = default_summary(px_out, false);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json summary{{"command", run.command},
               {"version", QUADNET_VERSION},
               {"wall_time_s", wall},
               {"config", run.config},
               {"status_counts", run.status_counts},
               {"results", run.results}};
  const std::string path = summary_override.empty() ? run.summary_path : summary_override;
  if (path.empty()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    csv::write_file(path, summary.dump(2) + "\n");
    std::cerr << "summary: " << path << '\n';
  }
  return 0;
}
