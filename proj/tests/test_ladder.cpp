#include <cmath>

#include "crflow/errors.hpp"
#include "crflow/ladder.hpp"
#include "doctest.h"

using namespace crflow;

namespace {

LadderConfig quick_config() {
  LadderConfig c;
  c.checkpoints = {1e-3, 2e-3, 4e-3, 0.1, 0.5};
  c.horizon = 0.5;
  return c;
}

}  // namespace

TEST_CASE("ladder config validation") {
  CHECK_NOTHROW(LadderConfig{}.validate());
  LadderConfig c;
  c.eps = {1e-2, 1e-1};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.rho_hat_max = {20.0, 10.0};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.window = {0.0, 15.0};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  CHECK(c.rho0_at(2) == 10.0);
}

TEST_CASE("cubic interpolation is exact on cubics") {
  const RadialGrid g(33, 4.0);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    v[i] = 1.0 - 2.0 * x + 0.5 * x * x * x;
  }
  for (double x : {0.0, 0.06, 1.3, 2.77, 3.99, 4.0}) {
    CHECK(interpolate_cubic(g, v, x) == doctest::Approx(1.0 - 2.0 * x + 0.5 * x * x * x).epsilon(1e-12));
  }
  CHECK_THROWS_AS(interpolate_cubic(g, v, 5.0), DomainError);
}

TEST_CASE("stationary ladder: eps differences scale with eps") {
  LadderBase base;
  base.init = InitialData::stationary();
  const SweepResult sw = sweep(quick_config(), base, 2);
  CHECK(sw.runs.size() == 9);
  const DiagonalLimit lim = diagonal_limit(sw);
  REQUIRE(lim.eps_differences.size() == 2);
  CHECK(lim.eps_differences[0] / lim.eps_differences[1] == doctest::Approx(10.0).epsilon(0.05));
  CHECK(lim.certified);
  const UniformityReport u = uniformity_report(sw);
  CHECK(u.pass);
  for (const UniformityEntry& e : u.entries) CHECK(e.ratio <= 1.25);
}

TEST_CASE("degenerate ladder completes with positive metrics and a certified limit") {
  LadderBase base;
  const SweepResult a = sweep(quick_config(), base, 4);
  REQUIRE(a.runs.size() == 9);
  for (const LadderRun& r : a.runs) {
    for (const FlowState& st : r.trajectory.states) {
      if (st.t == 0.0) continue;
      for (std::size_t i = 0; i < st.metric.size(); ++i) CHECK(st.metric.min_eigen(i) > 0.0);
    }
  }
  const DiagonalLimit lim = diagonal_limit(a);
  CHECK(lim.certified);
  CHECK(lim.candidate == 8);
  for (const BoundReport& r : completeness_across(a)) CHECK(r.value >= 0.25);

  const SweepResult b = sweep(quick_config(), base, 1);
  for (std::size_t k = 0; k < a.runs.size(); ++k) {
    CHECK(a.runs[k].eps == b.runs[k].eps);
    CHECK(a.runs[k].rho_hat_max == b.runs[k].rho_hat_max);
    CHECK(a.runs[k].trajectory.states.back().u == b.runs[k].trajectory.states.back().u);
  }
}

TEST_CASE("bump data: rho_hat_max differences small on the window") {
  LadderBase base;
  base.init = InitialData::bump(2.0);
  LadderConfig fixed = quick_config();
  fixed.rho0 = {2.5, 2.5, 2.5};
  const DiagonalLimit lim = diagonal_limit(sweep(fixed, base, 4));
  REQUIRE(lim.rho_differences.size() == 2);
  CHECK(lim.rho_differences[0] <= fixed.cauchy_tol);
  CHECK(lim.rho_differences[1] <= fixed.cauchy_tol);
  // with rho0 tied to rho_hat_max / 4 the data itself moves, but still contracts
  const DiagonalLimit tied = diagonal_limit(sweep(quick_config(), base, 4));
  CHECK(tied.rho_differences[1] * 2.0 <= tied.rho_differences[0]);
  CHECK(tied.certified);
}

TEST_CASE("too few levels give a no-limit verdict") {
  LadderBase base;
  LadderConfig c = quick_config();
  c.eps = {1e-2};
  const DiagonalLimit lim = diagonal_limit(sweep(c, base, 2));
  CHECK_FALSE(lim.certified);
  CHECK(lim.verdict.find("no limit") != std::string::npos);
}

TEST_CASE("hypothesis gate runs before the sweep") {
  LadderBase base;
  base.init = InitialData::homogeneous(2.0);
  CHECK_THROWS_AS(sweep(quick_config(), base, 2), HypothesisFailure);
}
