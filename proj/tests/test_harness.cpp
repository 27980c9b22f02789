#include <doctest.h>

#include <cmath>
#include <sstream>

#include "quadnet/csv.hpp"
#include "quadnet/harness.hpp"
#include "quadnet/rng.hpp"

using namespace quadnet;

namespace {

TrialConfig small(Eigen::Index n) {
  TrialConfig c;
  c.d = 4;
  c.m = 8;
  c.m_star = 1;
  c.n = n;
  c.max_steps = 200000;
  c.gen_threshold = 1e-4;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("student at teacher succeeds immediately") {
  TrialConfig c = small(8);
  c.init = StudentInit::teacher;
  const TrialResult r = run_trial(c);
  CHECK(r.status == TrialStatus::success);
  REQUIRE(r.relax_time);
  CHECK(*r.relax_time == 0.0);
}

TEST_CASE("above and below the threshold") {
  const TrialResult good = run_trial(small(16));
  CHECK(good.status == TrialStatus::success);
  CHECK(good.final_gen_loss <= 1e-4);
  const TrialResult bad = run_trial(small(4));
  CHECK(bad.status != TrialStatus::success);
  if (bad.status == TrialStatus::failed) CHECK(bad.final_gen_loss > 1e9 * 4 * bad.final_train_loss);
}

TEST_CASE("config validation") {
  TrialConfig c = small(8);
  c.m = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small(8);
  c.n.reset();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.alpha = 2.5;
  CHECK(c.samples() == 10);
}

TEST_CASE("sweep is reproducible and independent of workers") {
  CHECK(sweep(SweepGrid{}, 3, 1).rows.empty());
  TrialConfig base = small(8);
  base.max_steps = 20000;
  const SweepGrid grid = make_grid(base, {4}, {1}, {1.5, 3.0});
  const ResultTable a = sweep(grid, 2, 99, 1), b = sweep(grid, 2, 99, 2);
  REQUIRE(a.trials.size() == 4);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].seed == b.trials[i].seed);
    CHECK(a.trials[i].result.final_gen_loss == b.trials[i].result.final_gen_loss);
    CHECK(a.trials[i].result.status == b.trials[i].result.status);
  }
  for (const auto& row : a.rows) {
    CHECK(row.trials == 2);
    CHECK(row.success_fraction >= 0.0);
    CHECK(row.success_fraction <= 1.0);
  }
  CHECK(a.rows[0].n == 6);
}

TEST_CASE("fit_alpha_c") {
  std::vector<double> alphas, tau;
  for (int k = 0; k < 20; ++k) {
    alphas.push_back(2.1 + 0.1 * k);
    tau.push_back(1.0 / (alphas.back() - 2.0));
  }
  const AlphaFit f = fit_alpha_c(alphas, tau);
  CHECK(f.alpha_c == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(f.theta == doctest::Approx(1.0).epsilon(1e-7));
  std::vector<double> rev_a(alphas.rbegin(), alphas.rend()), rev_t(tau.rbegin(), tau.rend());
  CHECK(fit_alpha_c(rev_a, rev_t).alpha_c == doctest::Approx(2.0).epsilon(1e-7));
  CHECK_THROWS_AS(fit_alpha_c({2.1, 2.2, 2.3}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(fit_alpha_c({2.1, 2.3, 2.2, 2.4}, {1, 2, 3, 4}), std::invalid_argument);
}

TEST_CASE("log_mean") {
  CHECK(log_mean({{1.0, 4.0}}) == std::vector<double>{1.0, 4.0});
  const auto g = log_mean({{2.0, 1.0}, {8.0, 9.0}});
  CHECK(g[0] == doctest::Approx(4.0));
  CHECK(g[1] == doctest::Approx(3.0));
  CHECK(log_mean({{0.0}})[0] == doctest::Approx(1e-300));
  CHECK_THROWS_AS(log_mean({{1.0}, {1.0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(log_mean({{0.0, 1.0}, {0.0, 2.0}}, {{1.0, 1.0}, {1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("csv round trip for relaxation data") {
  std::istringstream in("alpha,relax_time\n4,1.5\n3,\n2.5,7\n");
  const csv::RelaxData d = csv::read_relax(in);
  CHECK(d.alphas == std::vector<double>{4, 2.5});
  CHECK(d.relax_times == std::vector<double>{1.5, 7});
  CHECK(d.skipped == 1);
  std::istringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(csv::read_relax(bad), std::invalid_argument);
  std::ostringstream os;
  csv::write_fit(os, AlphaFit{});
  CHECK(os.str().rfind("alpha_c,ci_low,ci_high", 0) == 0);
}

}
