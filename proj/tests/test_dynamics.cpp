#include <doctest.h>

#include <cmath>

#include "quadnet/dynamics.hpp"
#include "quadnet/losses.hpp"
#include "quadnet/rate.hpp"
#include "support.hpp"

using namespace quadnet;

TEST_SUITE("dynamics") {

TEST_CASE("config validation") {
  IntegratorConfig cfg;
  cfg.step = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.step = 1e-3;
  cfg.record_every = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_method("rk4") == Method::rk4);
  CHECK_THROWS(parse_method("midpoint"));
}

TEST_CASE("teacher is a fixed point of every flow") {
  const WeightMatrix t = make_teacher(3, 2, TeacherEnsemble::gaussian_iid, 1);
  const Dataset data = sample_dataset(t, 6, 2);
  IntegratorConfig cfg;
  cfg.max_steps = 50;
  const Trajectory g = flow_gram(gram(t), gram(t), data, cfg);
  CHECK(g.gen_loss.back() == doctest::Approx(0.0).scale(1.0));
  const Trajectory w = gd_weights(t, gram(t), data, cfg);
  CHECK(w.train_loss.back() < 1e-28);
}

TEST_CASE("recording schedule and stop threshold") {
  const WeightMatrix t = make_teacher(3, 1, TeacherEnsemble::gaussian_iid, 3);
  IntegratorConfig cfg;
  cfg.max_steps = 25;
  cfg.record_every = 10;
  const Trajectory traj = flow_gram(GramMatrix::identity(3), gram(t), cfg);
  REQUIRE(traj.size() == 4);
  CHECK(traj.steps == std::vector<std::int64_t>{0, 10, 20, 25});
  CHECK(traj.times[3] == doctest::Approx(25 * cfg.step));
  CHECK(traj.train_loss.empty());

  cfg.max_steps = 100000;
  cfg.record_every = 1;
  cfg.stop_threshold = 1e-3;
  const Trajectory stopped = flow_gram(GramMatrix::identity(3), gram(t), cfg);
  CHECK(stopped.status == FlowStatus::stopped);
  CHECK(stopped.gen_loss.back() <= 1e-3);
  CHECK(stopped.gen_loss[stopped.size() - 2] > 1e-3);
}

TEST_CASE("population loss decreases along the Gram flow and PSD is kept") {
  const WeightMatrix t = make_teacher(4, 2, TeacherEnsemble::gaussian_iid, 4);
  IntegratorConfig cfg;
  cfg.max_steps = 2000;
  cfg.record_every = 50;
  cfg.keep_snapshots = true;
  const Trajectory traj = flow_gram(GramMatrix::identity(4), gram(t), cfg);
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj.gen_loss[i] <= traj.gen_loss[i - 1]);
  for (const auto& s : traj.snapshots) CHECK(s.min_eigenvalue() > -1e-10);
  CHECK(traj.status == FlowStatus::completed);
}

TEST_CASE("oversized steps diverge and are flagged") {
  const WeightMatrix t = make_teacher(3, 1, TeacherEnsemble::gaussian_iid, 5);
  IntegratorConfig cfg;
  cfg.step = 5.0;
  cfg.max_steps = 200;
  const Trajectory traj = gd_weights(make_student(3, 6, 6), gram(t), cfg);
  CHECK(traj.status == FlowStatus::diverged);
  for (double v : traj.gen_loss) CHECK(std::isfinite(v));
}

TEST_CASE("non-PSD start is rejected") {
  CHECK_THROWS_AS(flow_gram(GramMatrix::diagonal(-Vector::Ones(2)), GramMatrix::identity(2), IntegratorConfig{}),
                  std::invalid_argument);
}

TEST_CASE("proximal solvers agree to first order") {
  const WeightMatrix t = make_teacher(3, 1, TeacherEnsemble::gaussian_iid, 7);
  const Dataset data = sample_dataset(t, 9, 8);
  ProximalOptions first, implicit;
  implicit.solver = ProximalSolver::implicit;
  auto gap = [&](double tau) {
    const auto steps = static_cast<std::int64_t>(std::llround(0.2 / tau));
    const Trajectory a = proximal_flow(Matrix::Identity(3, 3), gram(t), data, tau, steps, first);
    const Trajectory b = proximal_flow(Matrix::Identity(3, 3), gram(t), data, tau, steps, implicit);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    return (a.snapshots.back().matrix() - b.snapshots.back().matrix()).norm();
  };
  // The two solvers differ at O(tau) over a fixed horizon.
  CHECK(gap(1e-3) / gap(5e-4) == doctest::Approx(2.0).epsilon(0.1));
  const Trajectory b = proximal_flow(Matrix::Identity(3, 3), gram(t), data, 1e-3, 200, implicit);
  CHECK(b.train_loss.back() < b.train_loss.front());
}

}

TEST_SUITE("rate") {

TEST_CASE("synthetic decays are classified") {
  std::vector<double> t, quad, expo;
  for (int k = 0; k <= 3000; ++k) {
    const double s = 0.01 * k;
    t.push_back(s);
    quad.push_back(0.25 / ((1 + 3 * s) * (1 + 3 * s)));
    expo.push_back(std::exp(-0.7 * s));
  }
  const RateReport q = rate_diagnostics(t, quad);
  CHECK(q.decay_class == DecayClass::quadratic);
  REQUIRE(q.plateau);
  CHECK(*q.plateau == doctest::Approx(0.25 / 9).epsilon(0.05));
  CHECK(q.bound_ok);
  const RateReport e = rate_diagnostics(t, expo);
  CHECK(e.decay_class == DecayClass::exponential);
  REQUIRE(e.rate);
  CHECK(*e.rate == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("short series are undetermined") {
  const std::vector<double> t{0, 1, 2, 3}, l{1, 0.5, 0.2, 0.1};
  CHECK(rate_diagnostics(t, l).decay_class == DecayClass::undetermined);
  CHECK_THROWS_AS(rate_diagnostics(t, std::vector<double>{1.0}), std::invalid_argument);
}

}
