#include <algorithm>
#include <cmath>
#include <future>
#include <vector>

#include "crflow/errors.hpp"
#include "crflow/flow.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crflow;

namespace {

RunSpec homogeneous_spec(const Background& bg, double c, double horizon, SchemeConfig scheme = {},
                         std::size_t n = 129, Frame frame = Frame::Normalized) {
  const RadialGrid g(n, 10.0);
  return RunSpec{FlowProblem::make(bg, g, InitialData::homogeneous(c), {}, frame), scheme, horizon,
                 {0.1, 0.5, 1.0}, true, "test"};
}

double sup_error_vs_oracle(const Trajectory& traj, double c) {
  const int n = traj.background().dim();
  double e = 0.0;
  for (const FlowState& st : traj.states) {
    const double want = oracle::homogeneous_u(st.t, c, n);
    for (double v : st.u) e = std::max(e, std::fabs(v - want));
  }
  return e;
}

}  // namespace

TEST_CASE("grid construction") {
  const RadialGrid g(257, 10.0);
  CHECK(g.spacing() == doctest::Approx(10.0 / 256));
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(256) == 10.0);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g.node(i) > g.node(i - 1));
  CHECK_THROWS_AS(RadialGrid(8, 1.0), SizeError);
  CHECK_THROWS_AS(RadialGrid(32, -1.0), ParameterError);
}

TEST_CASE("tridiagonal solve and M-matrix pattern") {
  Tridiagonal m(5);
  for (std::size_t i = 0; i < 5; ++i) {
    m.diag[i] = 4.0;
    m.lower[i] = -1.0;
    m.upper[i] = -1.0;
  }
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> b = m.apply(x);
  const std::vector<double> y = solve_tridiagonal(m, b);
  for (std::size_t i = 0; i < 5; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-14));
  CHECK(is_m_matrix_pattern(m));
  m.upper[2] = 0.5;
  CHECK_FALSE(is_m_matrix_pattern(m));
}

TEST_CASE("scheme config validation and refinement") {
  SchemeConfig s;
  CHECK_NOTHROW(s.validate());
  s.ratio = 1.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  const SchemeConfig r = SchemeConfig{}.refined(2.0);
  CHECK(r.t_min == doctest::Approx(5e-5));
  CHECK(r.dt_max == doctest::Approx(0.025));
  CHECK(r.ratio == doctest::Approx(1.25));
  const auto times = time_grid(SchemeConfig{}, 1.0, {0.1, 0.5});
  CHECK(times.front() == 0.0);
  CHECK(times[1] == doctest::Approx(1e-4));
  CHECK(times.back() == 1.0);
  CHECK(std::count(times.begin(), times.end(), 0.1) == 1);
  CHECK(std::count(times.begin(), times.end(), 0.5) == 1);
  for (std::size_t k = 1; k < times.size(); ++k) {
    CHECK(times[k] > times[k - 1]);
    CHECK(times[k] - times[k - 1] <= 0.05 + 1e-15);
  }
}

TEST_CASE("regularized initial coefficient") {
  const Background disc = Background::poincare_disc();
  const RadialGrid g(257, 20.0);
  const double rho0 = 3.0;
  const FormRatios bump = regularize_initial(InitialData::bump(1.5), 0.01, rho0, disc, g);
  const FormRatios flat = regularize_initial(InitialData::stationary(), 0.01, rho0, disc, g);
  const InitialData b = InitialData::bump(1.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = disc.exhaustion(g.node(i));
    if (rho <= rho0) CHECK(bump.radial[i] == doctest::Approx(b.lambda(rho) + 0.01));
    if (rho >= 2 * rho0) CHECK(bump.radial[i] == doctest::Approx(1.01));
    CHECK(flat.radial[i] == doctest::Approx(1.01));
    CHECK(bump.radial[i] > 0.0);
  }
  CHECK_THROWS_AS(regularize_initial(InitialData::degenerate(), -1.0, rho0, disc, g), ParameterError);
  CHECK_THROWS_AS(regularize_initial(InitialData::degenerate(), 0.1, 0.5, disc, g), ParameterError);
}

TEST_CASE("alpha ratio") {
  const Background disc = Background::poincare_disc();
  const FormRatios g0 = FormRatios::constant(4, 1, 0.3);
  const FormRatios a0 = build_alpha(0.0, g0, disc);
  for (double v : a0.radial) CHECK(v == doctest::Approx(0.3));
  for (double v : build_alpha(60.0, g0, disc).radial) CHECK(v == doctest::Approx(1.0));
  const FormRatios zero = FormRatios::constant(4, 1, 0.0);
  for (double v : build_alpha(std::log(2.0), zero, disc).radial) {
    CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("Chern Laplacian of |z|^2 on the disc") {
  const Background disc = Background::poincare_disc();
  std::vector<double> errs;
  for (std::size_t n : {65u, 129u, 257u, 513u}) {
    const RadialGrid g(n, 3.0);
    std::vector<double> u(n), c(n, 2.5);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::pow(std::tanh(g.node(i)), 2);
    const auto lap = chern_laplacian_radial(u, g, disc);
    const auto zero = chern_laplacian_radial(c, g, disc);
    double e = 0.0;
    for (std::size_t i = g.interior_begin(); i < g.interior_end(); ++i) {
      const double r2 = u[i];
      e = std::max(e, std::fabs(lap[i] - (1 - r2) * (1 - r2) / 2.0));
      CHECK(std::fabs(zero[i]) <= 1e-10);
    }
    errs.push_back(e);
  }
  for (std::size_t k = 1; k < errs.size(); ++k) {
    const double factor = errs[k - 1] / errs[k];
    CHECK(factor >= 3.5);
    CHECK(factor <= 4.5);
  }
}

TEST_CASE("Monge-Ampere log ratio") {
  const Background disc = Background::poincare_disc();
  const RadialGrid g(129, 5.0);
  const std::vector<double> zero(g.size(), 0.0);
  const FormRatios one = FormRatios::constant(g.size(), 1, 1.0);
  for (double v : ma_log_ratio(zero, one, g, disc)) CHECK(v == 0.0);

  const FormRatios half = FormRatios::constant(g.size(), 1, 0.5);
  for (double t : {0.0, 0.3, 2.0}) {
    const std::vector<double> c(g.size(), 0.7);
    for (double v : ma_log_ratio(c, build_alpha(t, half, disc), g, disc)) {
      CHECK(v == doctest::Approx(std::log(1.0 - 0.5 * std::exp(-t))).epsilon(1e-12));
    }
  }

  // ball: Phi = -3 log(1 - rho) + c rho, det ratio (Phi')(Phi' + rho Phi'') / (h_T h_R)
  const Background ball = Background::hyperbolic_ball(2);
  const RadialGrid gb(257, 3.0);
  const double c = 0.05;
  std::vector<double> u(gb.size());
  for (std::size_t i = 0; i < gb.size(); ++i) u[i] = c * std::pow(std::tanh(gb.node(i)), 2);
  const FormRatios ones = FormRatios::constant(gb.size(), 2, 1.0);
  const auto got = ma_log_ratio(u, ones, gb, ball);
  for (std::size_t i = gb.interior_begin(); i < gb.interior_end(); ++i) {
    const double rho = std::pow(std::tanh(gb.node(i)), 2);
    const double d1 = 3.0 / (1 - rho);
    const double d2 = 3.0 / ((1 - rho) * (1 - rho));
    const double want = std::log((d1 + c) / d1) + std::log((d2 + c) / d2);
    CHECK(got[i] == doctest::Approx(want).epsilon(1e-4));
  }

  FormRatios bad = one;
  bad.radial[11] = -0.1;
  try {
    ma_log_ratio(zero, bad, g, disc);
    FAIL("expected a positivity error");
  } catch (const PositivityError& e) {
    CHECK(e.node() == 11);
  }
}

TEST_CASE("boundary value and homogeneous tail") {
  for (double t : {0.0, 0.5, 3.0}) CHECK(boundary_value(t, 0.0) == 0.0);
  CHECK(std::fabs(boundary_value(40.0, 0.1)) < 1e-15);
  const double want = std::exp(-1.0) * oracle::quad(
                          [](double s) { return std::exp(s) * std::log1p(0.1 * std::exp(-s)); }, 0.0, 1.0);
  CHECK(std::fabs(boundary_value(1.0, 0.1) - want) <= 1e-10);
  for (double t : {1e-3, 0.1, 1.0, 5.0}) {
    for (int n : {1, 2}) {
      CHECK(std::fabs(tail_ode_value(t, 0.5, n) - oracle::homogeneous_u(t, 0.5, n)) <= 1e-10);
    }
  }
  // int_0^s n log(c + r) dr
  for (double s : {0.0, 0.5, 2.0}) {
    const double c = 0.5;
    const double want_u = 2 * ((c + s) * std::log(c + s) - (c + s) - (c * std::log(c) - c));
    CHECK(tail_ode_value_unnormalized(s, c, 2) == doctest::Approx(want_u).epsilon(1e-13));
  }
}

TEST_CASE("stationary data is an exact fixed point") {
  for (const Background& bg : {Background::poincare_disc(), Background::hyperbolic_ball(2)}) {
    const RadialGrid g(129, 10.0);
    const Trajectory t = run({FlowProblem::make(bg, g, InitialData::stationary(), {}), {}, 3.0,
                              {1.0}, false, ""});
    for (const FlowState& st : t.states) {
      for (double v : st.u) CHECK(std::fabs(v) <= 1e-10);
    }
  }
}

TEST_CASE("homogeneous data stays constant and follows the scalar ODE") {
  for (const Background& bg : {Background::poincare_disc(), Background::hyperbolic_ball(2)}) {
    const Trajectory t = run(homogeneous_spec(bg, 0.5, 1.0));
    for (const FlowState& st : t.states) {
      for (double v : st.u) CHECK(v == doctest::Approx(st.u[0]).epsilon(1e-9));
      for (double v : st.metric.radial) CHECK(v > 0.0);
    }
    CHECK(sup_error_vs_oracle(t, 0.5) <= 5 * SchemeConfig{}.dt_max);
  }
  std::vector<double> errs;
  for (double f : {1.0, 2.0, 4.0}) {
    errs.push_back(sup_error_vs_oracle(run(homogeneous_spec(Background::poincare_disc(), 0.5, 1.0,
                                                            SchemeConfig{}.refined(f), 33)),
                                       0.5));
  }
  for (std::size_t k = 1; k < errs.size(); ++k) {
    const double order = std::log2(errs[k - 1] / errs[k]);
    CHECK(order >= 0.8);
    CHECK(order <= 1.2);
  }
}

TEST_CASE("degenerate start: first step positive for small eps") {
  const Background disc = Background::poincare_disc();
  const RadialGrid g(257, 10.0);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const FlowProblem p = FlowProblem::make(disc, g, InitialData::degenerate(), {eps, 2.5});
    FlowState st;
    st.u.assign(g.size(), 0.0);
    st.udot.assign(g.size(), 0.0);
    st.metric = p.gamma0;
    st.eps = eps;
    const StepResult r = step(st, SchemeConfig{}.t_min, SchemeConfig{}, p);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(r.state.metric.min_eigen(i) > 0.0);
  }
  CHECK_THROWS_AS(run({FlowProblem::make(disc, g, InitialData::degenerate(), {}), {}, 1.0, {}, true, ""}),
                  HypothesisFailure);
}

TEST_CASE("runs are deterministic across threads") {
  const RunSpec spec{FlowProblem::make(Background::poincare_disc(), RadialGrid(129, 10.0),
                                       InitialData::bump(2.0), {0.01, 2.5}),
                     {}, 0.5, {0.1}, true, ""};
  const Trajectory a = run(spec);
  auto fut = std::async(std::launch::async, [&] { return run(spec); });
  const Trajectory b = fut.get();
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    CHECK(a.states[k].t == b.states[k].t);
    CHECK(a.states[k].u == b.states[k].u);
    CHECK(a.states[k].metric.radial == b.states[k].metric.radial);
  }
}

TEST_CASE("frame conversions") {
  const Trajectory t = run(homogeneous_spec(Background::poincare_disc(), 0.5, 1.0));
  const FlowState& s0 = t.states.front();
  const FlowState c0 = to_unnormalized(s0, 1);
  CHECK(c0.t == 0.0);
  CHECK(c0.u == s0.u);
  CHECK(c0.metric.radial == s0.metric.radial);

  FlowState ln2 = s0;
  ln2.t = std::log(2.0);
  const FlowState c1 = to_unnormalized(ln2, 1);
  CHECK(c1.t == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < ln2.u.size(); ++i) {
    CHECK(c1.metric.radial[i] == doctest::Approx(2.0 * ln2.metric.radial[i]).epsilon(1e-15));
  }

  const Trajectory back = from_unnormalized(to_unnormalized(t));
  REQUIRE(back.states.size() == t.states.size());
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    const FlowState& a = t.states[k];
    const FlowState& b = back.states[k];
    CHECK(std::fabs(a.t - b.t) <= std::nextafter(a.t, 1e300) - a.t);
    for (std::size_t i = 0; i < a.u.size(); ++i) {
      CHECK(std::fabs(a.metric.radial[i] - b.metric.radial[i]) <=
            std::nextafter(a.metric.radial[i], 1e300) - a.metric.radial[i]);
      CHECK(std::fabs(a.u[i] - b.u[i]) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(from_unnormalized(t), ParameterError);
}

TEST_CASE("unnormalized stepper from the background metric") {
  const Background disc = Background::poincare_disc();
  const Trajectory t = run(homogeneous_spec(disc, 1.0, 2.0, {}, 65, Frame::Unnormalized));
  for (const FlowState& st : t.states) {
    for (std::size_t i = 0; i < st.u.size(); ++i) {
      CHECK(st.metric.radial[i] == doctest::Approx(1.0 + st.t).epsilon(1e-12));
      CHECK(st.udot[i] == doctest::Approx(std::log1p(st.t)).epsilon(1e-12));
    }
    const double phi = (1 + st.t) * std::log1p(st.t) - st.t;
    CHECK(std::fabs(st.u[0] - phi) <= 0.05 * 2);
  }
  const FlowState& s0 = t.states.front();
  for (double v : s0.udot) CHECK(v == 0.0);
}

TEST_CASE("potential integral reconstruction") {
  const Trajectory stat = run({FlowProblem::make(Background::poincare_disc(), RadialGrid(65, 10.0),
                                                 InitialData::stationary(), {}),
                               {}, 1.0, {}, true, ""});
  const PotentialReconstruction r = potential_integral(stat);
  CHECK(r.sup_difference == 0.0);
  std::vector<double> diffs;
  for (double f : {1.0, 2.0, 4.0}) {
    const Trajectory t = run(homogeneous_spec(Background::poincare_disc(), 0.5, 1.0,
                                              SchemeConfig{}.refined(f), 33));
    const PotentialReconstruction p = potential_integral(t);
    diffs.push_back(p.sup_difference);
    const std::size_t last = p.times.size() - 1;
    CHECK(std::fabs(p.u[last][5] - oracle::homogeneous_u(p.times[last], 0.5, 1)) <= 0.05);
  }
  for (std::size_t k = 1; k < diffs.size(); ++k) {
    CHECK(std::log2(diffs[k - 1] / diffs[k]) >= 0.8);
  }
  Trajectory few = stat;
  few.states.resize(4);
  CHECK_THROWS_AS(potential_integral(few), ResolutionError);
}

TEST_CASE("scheme Jacobian is an M-matrix") {
  const Trajectory t = run({FlowProblem::make(Background::hyperbolic_ball(2), RadialGrid(129, 10.0),
                                              InitialData::bump(2.0), {0.01, 2.5}),
                            {}, 0.5, {}, true, ""});
  for (std::size_t k = 1; k < t.states.size(); k += 5) {
    CHECK(is_m_matrix_pattern(scheme_jacobian(t.states[k], t.steps[k - 1].dt, t.problem)));
  }
}
