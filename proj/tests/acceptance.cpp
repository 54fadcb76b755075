// Acceptance harness: one PASS/FAIL line per criterion.
// Exit status is 0 once every criterion has been evaluated; pass --strict to
// make it reflect the verdicts instead.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crflow/diagnostics.hpp"
#include "crflow/errors.hpp"
#include "crflow/ladder.hpp"
#include "oracles.hpp"

using namespace crflow;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(),
              v.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunSpec spec_for(const Background& bg, const InitialData& init, double horizon,
                 std::vector<double> cps, std::size_t n = 257, double rmax = 10.0,
                 SchemeConfig scheme = {}, Frame frame = Frame::Normalized, bool all = false) {
  return RunSpec{FlowProblem::make(bg, RadialGrid(n, rmax), init, {}, frame), scheme, horizon,
                 std::move(cps), all, "acceptance"};
}

double sup_u_error(const Trajectory& traj, double c) {
  double e = 0.0;
  for (const FlowState& st : traj.states) {
    const double want = oracle::homogeneous_u(st.t, c, traj.background().dim());
    for (double v : st.u) e = std::max(e, std::fabs(v - want));
  }
  return e;
}

double ulp_distance(double a, double b) {
  if (a == b) return 0.0;
  const double big = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) / (std::nextafter(big, INFINITY) - big);
}

const BoundReport* find(const std::vector<BoundReport>& reps, const std::string& name) {
  for (const BoundReport& r : reps) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string(argv[1]) == "--strict";
  const Background disc = Background::poincare_disc();
  const Background ball = Background::hyperbolic_ball(2);
  const double dt_max = SchemeConfig{}.dt_max;

  criterion(1, "fixed point", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const Trajectory t = run(spec_for(disc, InitialData::stationary(), 5.0, {1.0, 2.0, 5.0}));
    const double secs = elapsed_since(t0);
    double sup = 0.0;
    for (const FlowState& st : t.states) {
      for (double v : st.u) sup = std::max(sup, std::fabs(v));
    }
    return Verdict{sup <= 1e-8 && secs <= 10.0,
                   fmt("sup|u| = %.3e (tol 1e-8), run %.2f s (limit 10 s)", sup, secs)};
  });

  criterion(2, "homogeneous oracle", [&] {
    const std::vector<double> cps{0.1, 0.5, 1.0, 2.0};
    const double err =
        sup_u_error(run(spec_for(disc, InitialData::homogeneous(0.5), 2.0, cps)), 0.5);
    std::vector<double> errs;
    for (double f : {1.0, 2.0, 4.0, 8.0}) {
      errs.push_back(sup_u_error(run(spec_for(disc, InitialData::homogeneous(0.5), 2.0, cps, 33,
                                              10.0, SchemeConfig{}.refined(f))),
                                 0.5));
    }
    const OrderReport o = observed_order(errs, 0.8, 1.2);
    std::string orders;
    for (double p : o.orders) orders += fmt(" %.3f", p);
    return Verdict{err <= 5 * dt_max && o.pass,
                   fmt("sup error %.3e (tol %.3g), time orders%s (need [0.8, 1.2])", err,
                       5 * dt_max, orders.c_str())};
  });

  criterion(3, "long-time Kahler-Einstein convergence", [&] {
    std::string detail;
    bool ok = true;
    for (const Background& bg : {disc, ball}) {
      const auto t0 = std::chrono::steady_clock::now();
      const Trajectory t = run(spec_for(bg, InitialData::homogeneous(0.5), 15.0, {1.0, 5.0, 15.0}));
      const double secs = elapsed_since(t0);
      const FlowState& last = t.at_time(15.0);
      const double ke = ke_residual(last, t.grid(), bg);
      const double dev = sup_interior_deviation(last, t.grid());
      const bool this_ok = ke <= 1e-3 && secs <= 120.0 && (bg.dim() > 1 || dev <= 1e-3);
      ok = ok && this_ok;
      detail += fmt("%sdim %d: ke %.3e, |a-1| %.3e, %.2f s", detail.empty() ? "" : "; ", bg.dim(),
                    ke, dev, secs);
    }
    return Verdict{ok, detail + " (tol 1e-3, limit 120 s)"};
  });

  LadderBase degenerate;
  const auto sweep_start = std::chrono::steady_clock::now();
  SweepResult deg_sweep = sweep(LadderConfig{}, degenerate, 4);
  const double sweep_secs = elapsed_since(sweep_start);
  const DiagonalLimit deg_limit = diagonal_limit(deg_sweep);

  criterion(4, "degenerate start", [&] {
    const Trajectory& cand = deg_sweep.runs[deg_limit.candidate].trajectory;
    double sup_u = 0.0;
    for (double v : cand.at_time(cand.states[1].t).u) sup_u = std::max(sup_u, std::fabs(v));
    const BoundReport* env = find(deg_sweep.runs[deg_limit.candidate].reports, "u_envelope");
    const bool env_ok = env && env->applicable && std::isfinite(env->value);
    const UniformityReport u = uniformity_report(deg_sweep);
    std::map<std::string, double> worst;
    for (const UniformityEntry& e : u.entries) {
      if (e.pass) continue;
      const std::string name = e.name.substr(0, e.name.find('@'));
      worst[name] = std::max(worst[name], e.ratio);
    }
    std::string failing;
    for (const auto& [name, ratio] : worst) failing += fmt(" %s ratio %.2f", name.c_str(), ratio);
    const bool ok = deg_sweep.runs.size() == 9 && deg_limit.certified && env_ok && u.pass &&
                    sweep_secs <= 600.0;
    return Verdict{
        ok, fmt("%zu runs in %.2f s, certified %s, sup|u(t=%.1e)| %.3e, u_envelope %.4g, "
                "uniformity gate (factor 1.25) %s%s",
                deg_sweep.runs.size(), sweep_secs, deg_limit.certified ? "yes" : "no",
                cand.states[1].t, sup_u, env ? env->value : NAN, u.pass ? "passes" : "fails:",
                failing.c_str())};
  });

  criterion(5, "instantaneous completeness", [&] {
    const std::vector<BoundReport> reps = completeness_across(deg_sweep);
    double worst = INFINITY;
    for (const BoundReport& r : reps) worst = std::min(worst, r.value);
    return Verdict{!reps.empty() && worst >= 0.25,
                   fmt("min slope at t = 0.1 over %zu rho_hat_max levels %.4f (need >= 0.25)",
                       reps.size(), worst)};
  });

  criterion(6, "initial attainment", [&] {
    LadderBase base;
    base.init = InitialData::bump(2.0);
    const SweepResult sw = sweep(LadderConfig{}, base, 4);
    const DiagonalLimit lim = diagonal_limit(sw);
    const AttainmentReport a = initial_attainment(sw.runs[lim.candidate].trajectory, {0.0, 1.5});
    std::string d;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
      d += fmt(" t=%.0e D0=%.3e", a.times[k], a.d0[k]);
    }
    return Verdict{a.pass && lim.certified,
                   fmt("K = [0, 1.5],%s (tol 5e-3), differences decay %s", d.c_str(),
                       a.decay_monotone ? "monotonically" : "non-monotonically")};
  });

  criterion(7, "conversion identities", [&] {
    double worst_metric = 0.0, worst_phidot = 0.0, worst_phi = 0.0, worst_ulp = 0.0, worst_u = 0.0;
    for (const InitialData& init : {InitialData::stationary(), InitialData::homogeneous(0.5)}) {
      const Trajectory normalized = run(spec_for(disc, init, 1.0, {0.25, 0.5, 1.0}));
      const Trajectory converted = to_unnormalized(normalized);
      const Trajectory direct = run(spec_for(disc, init, std::expm1(1.0),
                                             {std::expm1(0.25), std::expm1(0.5)}, 257, 10.0, {},
                                             Frame::Unnormalized));
      for (const FlowState& a : converted.states) {
        for (const FlowState& b : direct.states) {
          if (std::fabs(a.t - b.t) > 1e-12) continue;
          for (std::size_t i = 0; i < a.u.size(); ++i) {
            worst_metric = std::max(worst_metric, std::fabs(a.metric.radial[i] - b.metric.radial[i]));
            worst_phidot = std::max(worst_phidot, std::fabs(a.udot[i] - b.udot[i]));
            worst_phi = std::max(worst_phi, std::fabs(a.u[i] - b.u[i]));
          }
        }
      }
      const Trajectory back = from_unnormalized(converted);
      for (std::size_t k = 0; k < back.states.size(); ++k) {
        const FlowState& x = normalized.states[k];
        const FlowState& y = back.states[k];
        worst_ulp = std::max(worst_ulp, ulp_distance(x.t, y.t));
        for (std::size_t i = 0; i < x.u.size(); ++i) {
          worst_ulp = std::max(worst_ulp, ulp_distance(x.metric.radial[i], y.metric.radial[i]));
          worst_u = std::max(worst_u, std::fabs(x.u[i] - y.u[i]));
        }
      }
    }
    const bool ok = worst_metric <= 1e-6 && worst_phidot <= 1e-6 && worst_ulp <= 1.0;
    return Verdict{ok, fmt("converted vs direct: metric %.3e, phidot %.3e (tol 1e-6), phi %.3e "
                           "(time discretization, informational); round trip t and metric %.0f "
                           "ulp, u %.3e",
                           worst_metric, worst_phidot, worst_phi, worst_ulp, worst_u)};
  });

  criterion(8, "evolution identity", [&] {
    std::vector<double> errs;
    for (int lev = 0; lev < 4; ++lev) {
      const int f = 1 << lev;
      const Trajectory t = run(spec_for(disc, InitialData::homogeneous(0.5), 2.0, {0.5},
                                        256 * f + 1, 10.0, SchemeConfig{}.refined(f),
                                        Frame::Normalized, true));
      errs.push_back(identity_residual(t, {0.5, 2.0}).value);
    }
    const OrderReport o = observed_order(errs, 0.8);
    std::string d;
    for (double e : errs) d += fmt(" %.3e", e);
    return Verdict{o.pass, fmt("residuals%s, min order %.3f (need >= 0.8)", d.c_str(), o.min_order)};
  });

  criterion(9, "scalar-curvature floor", [&] {
    const Trajectory t = run(spec_for(disc, InitialData::homogeneous(0.5), 5.0, {0.5, 1.0, 2.0},
                                      257, 10.0, {}, Frame::Unnormalized));
    const BoundReport r = scalar_lower_unnormalized(t);
    return Verdict{r.pass, fmt("min margin %.3e over %zu checkpoints", r.value, t.states.size())};
  });

  criterion(10, "discrete maximum principle", [&] {
    RunSpec rs = spec_for(disc, InitialData::degenerate(), 2.0, {}, 257, 10.0, {},
                          Frame::Normalized, true);
    rs.problem = FlowProblem::make(disc, RadialGrid(257, 10.0), InitialData::degenerate(),
                                   {1e-3, 2.5});
    const Trajectory t = run(rs);
    const ComparisonSuite cs = comparison_suite(t, 100, 7);
    const MMatrixSurvey m = jacobian_survey(t, 20);
    return Verdict{cs.pass && cs.cases == 100 && m.pass && m.checked == 20,
                   fmt("comparison %d/%d, worst max f %.3e (tol 1e-12); M-matrix %d/%d",
                       cs.passed, cs.cases, cs.worst, m.checked - m.violations, m.checked)};
  });

  criterion(11, "hypothesis checkers", [&] {
    const RadialGrid g(257, 10.0);
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0}) {
      HypothesisSpec spec;
      spec.s = s;
      const HypothesisVerdict v = check_hypotheses(disc, InitialData::degenerate(), spec, g);
      worst = std::max(worst, std::fabs(v.min_ratio - (1.0 - std::exp(-s))));
    }
    const RadialGrid tail(1025, 64.0);
    const TailGrowthVerdict one = tr_growth_check(InitialData::stationary(), disc, tail);
    const TailGrowthVerdict decay = tr_growth_check(InitialData::tail_decay(), disc, tail);
    return Verdict{worst <= 1e-10 && one.passed && !decay.passed,
                   fmt("min ratio error %.3e (tol 1e-10); tr_growth lambda=1 %s, "
                       "lambda=exp(-rho) %s",
                       worst, one.passed ? "passes" : "fails", decay.passed ? "passes" : "fails")};
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return strict && failures > 0 ? 1 : 0;
}
