#include "crflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "crflow/errors.hpp"

namespace crflow {

std::string to_string(Extremum e) { return e == Extremum::Sup ? "sup" : "inf"; }

Extremum extremum_from_string(const std::string& s) {
  if (s == "sup") return Extremum::Sup;
  if (s == "inf") return Extremum::Inf;
  throw ParameterError("unknown extremum '" + s + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_window(double t, double lo, double hi) {
  const double slack = 1e-12 * std::max(1.0, std::fabs(hi));
  return t >= lo - slack && t <= hi + slack;
}

// Builds the report from a per-state functional evaluated on states with t in
// [lo, hi] (and t > 0 when `positive_only`).
template <class F>
BoundReport functional_report(std::string name, Extremum kind, const Trajectory& traj, double lo,
                              double hi, bool positive_only, F&& at_state) {
  BoundReport r;
  r.name = std::move(name);
  r.kind = kind;
  r.window = {lo, hi};
  double best = kind == Extremum::Sup ? -kInf : kInf;
  for (const FlowState& s : traj.states) {
    if (positive_only && !(s.t > 0.0)) continue;
    if (!in_window(s.t, lo, hi)) continue;
    const double v = at_state(s);
    r.trace.emplace_back(s.t, v);
    best = kind == Extremum::Sup ? std::max(best, v) : std::min(best, v);
  }
  if (r.trace.empty()) {
    r.applicable = false;
    r.pass = true;
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.note = "no checkpoint in window";
    return r;
  }
  r.window = {r.trace.front().first, r.trace.back().first};
  r.value = best;
  r.pass = std::isfinite(best);
  return r;
}

double last_time(const Trajectory& traj) {
  if (traj.states.empty()) throw ResolutionError("empty trajectory");
  return traj.states.back().t;
}

double dim_of(const Trajectory& traj) { return traj.background().dim(); }

double log1m_exp_neg(double t) { return std::log(-std::expm1(-t)); }  // log(1 - e^{-t})

}  // namespace

std::vector<BoundReport> upper_bounds(const Trajectory& traj) {
  const double T = last_time(traj);
  std::vector<BoundReport> out;
  out.push_back(functional_report("u_upper", Extremum::Sup, traj, 0.0, T, true,
                                  [](const FlowState& s) {
                                    const double m = std::min(s.t, 1.0);
                                    return *std::max_element(s.u.begin(), s.u.end()) / m;
                                  }));
  out.push_back(functional_report("udot_upper", Extremum::Sup, traj, 0.0, T, true,
                                  [](const FlowState& s) {
                                    const double w = std::expm1(s.t) / s.t;
                                    return *std::max_element(s.udot.begin(), s.udot.end()) * w;
                                  }));
  return out;
}

std::vector<BoundReport> lower_bounds(const Trajectory& traj, const HypothesisSpec& spec,
                                      std::optional<double> s1_opt) {
  const double s = spec.s;
  if (!(s > 0.0)) throw ParameterError("lower_bounds: s must be positive");
  const double s1 = s1_opt.value_or(std::min(1.0, 0.5 * s));
  if (!(s1 > 0.0 && s1 < s)) throw ParameterError("lower_bounds: need 0 < s1 < s");
  const double n = dim_of(traj);
  const double T = std::min(last_time(traj), s);
  const double scale_s = -std::expm1(-s);
  std::vector<BoundReport> out;

  out.push_back(functional_report(
      "u_envelope", Extremum::Inf, traj, 0.0, std::min(T, s * (1.0 - 1e-12)), true,
      [&](const FlowState& st) {
        const double env = n * st.t * log1m_exp_neg(st.t);
        const double m = *std::min_element(st.u.begin(), st.u.end());
        return (m - env) * scale_s / st.t;
      }));

  const double small_hi = std::min({s1, 1.0, T});
  out.push_back(functional_report("small_time", Extremum::Inf, traj, 0.0, small_hi, true,
                                  [&](const FlowState& st) {
                                    double m = kInf;
                                    for (std::size_t i = 0; i < st.u.size(); ++i) {
                                      m = std::min(m, st.udot[i] + st.u[i]);
                                    }
                                    return m - n * std::log(st.t);
                                  }));

  BoundReport floor = functional_report("udot_u_floor", Extremum::Inf, traj, 0.0, small_hi, false,
                                        [](const FlowState& st) {
                                          double m = kInf;
                                          for (std::size_t i = 0; i < st.u.size(); ++i) {
                                            m = std::min(m, st.udot[i] + st.u[i]);
                                          }
                                          return m;
                                        });
  floor.eps_uniform = false;
  floor.note = "constant depends on eps; finiteness only";
  out.push_back(std::move(floor));

  if (s > 1.0) {
    const double s2 = 0.5 * (1.0 + s);
    const double e2 = std::exp(s2 - s);
    const double w = (1.0 - e2) / (1.0 + s2 * e2);
    out.push_back(functional_report("late_window", Extremum::Inf, traj, 1.0, s2, true,
                                    [&](const FlowState& st) {
                                      double m = kInf;
                                      for (std::size_t i = 0; i < st.u.size(); ++i) {
                                        m = std::min(m, st.udot[i] + st.u[i]);
                                      }
                                      return m * w;
                                    }));
  } else {
    BoundReport late;
    late.name = "late_window";
    late.kind = Extremum::Inf;
    late.applicable = false;
    late.pass = true;
    late.value = std::numeric_limits<double>::quiet_NaN();
    late.note = "needs s > 1";
    out.push_back(std::move(late));
  }

  const double e1 = std::exp(s1 - s);
  const double w1 = (1.0 - e1) / (1.0 + s1 * e1);
  out.push_back(functional_report("u_global", Extremum::Inf, traj, 0.0, s1, false,
                                  [&](const FlowState& st) {
                                    return *std::min_element(st.u.begin(), st.u.end()) * w1;
                                  }));
  return out;
}

double trace_constant(double s, double s1) {
  if (!(s1 > 0.0 && s1 < s)) throw ParameterError("trace constant needs 0 < s1 < s");
  const double e = std::exp(s1 - s);
  return (1.0 + s1 * e) / ((-std::expm1(-s)) * (1.0 - e));
}

BoundReport trace_bound(const Trajectory& traj, double s, double s1) {
  const double E = trace_constant(s, s1);
  const double denom = E - log1m_exp_neg(s);
  const int dim = traj.background().dim();
  BoundReport r = functional_report(
      "trace_bound", Extremum::Sup, traj, 0.0, s1, true, [&](const FlowState& st) {
        double best = -kInf;
        for (std::size_t i = 0; i < st.metric.size(); ++i) {
          best = std::max(best, std::log(st.metric.trace(i, dim)));
        }
        return -std::expm1(-st.t) * best / denom;
      });
  r.note = "E = " + std::to_string(E);
  return r;
}

BoundReport uniform_equivalence(const Trajectory& traj, double s0, double s1) {
  if (!(s0 > 0.0 && s0 < s1)) throw ParameterError("uniform_equivalence needs 0 < s0 < s1");
  return functional_report("uniform_equivalence", Extremum::Sup, traj, s0, s1, true,
                           [](const FlowState& st) {
                             double c = 1.0;
                             for (std::size_t i = 0; i < st.metric.size(); ++i) {
                               const double lo = st.metric.min_eigen(i);
                               const double hi = st.metric.max_eigen(i);
                               c = std::max({c, hi, 1.0 / lo});
                             }
                             return c;
                           });
}

double completeness_slope(const FlowState& state, const RadialGrid& grid) {
  const std::size_t n = grid.size();
  if (state.metric.size() != n) throw SizeError("completeness: state does not match the grid");
  double length = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = state.metric.radial[i];
    const double b = state.metric.radial[i + 1];
    if (!(a > 0.0) || !(b > 0.0)) throw PositivityError("completeness: non-positive metric", i);
    length += 0.5 * (grid.node(i + 1) - grid.node(i)) * (std::sqrt(a) + std::sqrt(b));
  }
  return length / grid.rho_hat_max();
}

BoundReport completeness(const Trajectory& traj, double t, double kappa) {
  const FlowState& st = traj.at_time(t);
  BoundReport r;
  r.name = "completeness";
  r.kind = Extremum::Inf;
  r.window = {t, t};
  r.value = completeness_slope(st, traj.grid());
  r.trace.emplace_back(t, r.value);
  r.threshold = kappa;
  r.pass = std::isfinite(r.value) && r.value >= kappa;
  r.eps_uniform = false;
  return r;
}

AttainmentReport initial_attainment(const Trajectory& traj, Interval k,
                                    const AttainmentOptions& opts) {
  const RadialGrid& grid = traj.grid();
  if (!(k.lo >= 0.0 && k.hi > k.lo && k.hi <= grid.rho_hat_max())) {
    throw DomainError("attainment window must be a nonempty interval inside the grid");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.node(i) >= k.lo && grid.node(i) <= k.hi) idx.push_back(i);
  }
  if (idx.size() < 3) throw DomainError("attainment window holds fewer than 3 nodes");
  const std::vector<double>& lam = traj.problem.lambda;
  for (std::size_t i : idx) {
    if (!(lam[i] > 0.0)) {
      throw DomainError("attainment window leaves U = {lambda > 0} at rho_hat = " +
                        std::to_string(grid.node(i)));
    }
  }
  const double dx = grid.spacing();
  const auto measure = [&](const FlowState& st, double& d0, double& d1, double& d2) {
    d0 = d1 = d2 = 0.0;
    const auto one = [&](const std::vector<double>& a) {
      std::vector<double> e;
      e.reserve(idx.size());
      for (std::size_t i : idx) e.push_back(a[i] - lam[i]);
      for (std::size_t j = 0; j < e.size(); ++j) {
        d0 = std::max(d0, std::fabs(e[j]));
        if (j + 1 < e.size()) d1 = std::max(d1, std::fabs(e[j + 1] - e[j]) / dx);
        if (j >= 1 && j + 1 < e.size()) {
          d2 = std::max(d2, std::fabs(e[j + 1] - 2.0 * e[j] + e[j - 1]) / (dx * dx));
        }
      }
    };
    one(st.metric.radial);
    if (st.metric.has_tangential()) one(st.metric.tangential);
  };

  if (opts.times.size() < 3 || !std::is_sorted(opts.times.begin(), opts.times.end())) {
    throw ParameterError("initial_attainment needs at least 3 increasing checkpoint times");
  }
  AttainmentReport rep;
  for (double t : opts.times) {
    double d0, d1, d2;
    measure(traj.at_time(t), d0, d1, d2);
    rep.times.push_back(t);
    rep.d0.push_back(d0);
    rep.d1.push_back(d1);
    rep.d2.push_back(d2);
  }
  BoundReport& r = rep.discrepancy;
  r.name = "initial_attainment";
  r.kind = Extremum::Sup;
  r.window = {rep.times.front(), rep.times.back()};
  for (std::size_t j = 0; j < rep.times.size(); ++j) r.trace.emplace_back(rep.times[j], rep.d0[j]);
  r.value = rep.d0.front();
  r.threshold = opts.tol;
  r.eps_uniform = false;

  // Solver roundoff in u is amplified by dx^-2 in the metric and by one more
  // power per difference.
  const double noise1 = 4e-10 / (dx * dx * dx);
  const double noise2 = noise1 / dx;
  rep.decay_monotone = true;
  for (std::size_t j = 0; j + 1 < rep.times.size(); ++j) {
    rep.decay_monotone = rep.decay_monotone && rep.d1[j] <= rep.d1[j + 1] + noise1 &&
                         rep.d2[j] <= rep.d2[j + 1] + noise2;
  }
  r.pass = std::isfinite(r.value) && r.value <= opts.tol && rep.decay_monotone;
  rep.pass = r.pass;
  if (!rep.decay_monotone) r.note = "discrepancy differences do not decay as t decreases";
  return rep;
}

double ke_residual(const FlowState& state, const RadialGrid& grid, const Background& bg) {
  const FormRatios ric = ricci_ratios(grid, bg, state.metric);
  double worst = 0.0;
  for (std::size_t i = grid.interior_begin(); i < grid.interior_end(); ++i) {
    const double a = state.metric.radial[i];
    worst = std::max(worst, std::fabs(ric.radial[i] + a) / a);
    if (ric.has_tangential()) {
      const double b = state.metric.tangential[i];
      worst = std::max(worst, std::fabs(ric.tangential[i] + b) / b);
    }
  }
  return worst;
}

BoundReport ke_report(const Trajectory& traj, double t, double threshold) {
  const FlowState& st = traj.at_time(t);
  BoundReport r;
  r.name = "ke_residual";
  r.kind = Extremum::Sup;
  r.window = {t, t};
  r.value = ke_residual(st, traj.grid(), traj.background());
  r.trace.emplace_back(t, r.value);
  r.threshold = threshold;
  r.pass = std::isfinite(r.value) && r.value <= threshold;
  r.eps_uniform = false;
  return r;
}

double sup_interior_deviation(const FlowState& state, const RadialGrid& grid) {
  double worst = 0.0;
  for (std::size_t i = grid.interior_begin(); i < grid.interior_end(); ++i) {
    worst = std::max(worst, std::fabs(state.metric.radial[i] - 1.0));
    if (state.metric.has_tangential()) {
      worst = std::max(worst, std::fabs(state.metric.tangential[i] - 1.0));
    }
  }
  return worst;
}

BoundReport udot_lower_longtime(const Trajectory& traj) {
  const double T = last_time(traj);
  if (T < 6.0) {
    BoundReport r;
    r.name = "udot_longtime";
    r.applicable = false;
    r.pass = true;
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.eps_uniform = false;
    r.note = "needs a horizon T >= 6";
    return r;
  }
  BoundReport r = functional_report("udot_longtime", Extremum::Sup, traj, 2.0, T, true,
                                    [](const FlowState& st) {
                                      const double m =
                                          *std::min_element(st.udot.begin(), st.udot.end());
                                      return std::max(0.0, -m) * std::exp(0.5 * st.t);
                                    });
  r.eps_uniform = false;
  bool monotone = true;
  for (std::size_t j = 0; j + 1 < r.trace.size(); ++j) {
    if (r.trace[j].first < 0.5 * T) continue;
    const double slack = 1e-9 * std::exp(0.5 * r.trace[j + 1].first);
    monotone = monotone && r.trace[j + 1].second <= r.trace[j].second + slack;
  }
  if (!monotone) r.note = "not non-increasing over [T/2, T]";
  r.pass = r.pass && monotone;
  return r;
}

std::vector<double> scalar_curvature(const FlowState& state, const RadialGrid& grid,
                                     const Background& bg) {
  const FormRatios ric = ricci_ratios(grid, bg, state.metric);
  std::vector<double> r(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    r[i] = ric.radial[i] / state.metric.radial[i];
    if (ric.has_tangential()) r[i] += (bg.dim() - 1) * ric.tangential[i] / state.metric.tangential[i];
  }
  return r;
}

BoundReport scalar_lower_unnormalized(const Trajectory& traj, std::optional<double> allowance) {
  if (traj.problem.frame != Frame::Unnormalized) {
    throw ParameterError("scalar_lower_unnormalized: needs an unnormalized trajectory");
  }
  if (traj.states.empty()) throw ResolutionError("empty trajectory");
  const RadialGrid& grid = traj.grid();
  const Background& bg = traj.background();
  const double dx = grid.spacing();
  const double allow = allowance.value_or(10.0 * dx * dx);
  const auto min_r = [&](const FlowState& st) {
    const auto r = scalar_curvature(st, grid, bg);
    return *std::min_element(r.begin() + grid.interior_begin(), r.begin() + grid.interior_end());
  };
  const double L = -min_r(traj.states.front());
  const double n = bg.dim();
  BoundReport r = functional_report("scalar_lower", Extremum::Inf, traj, 0.0, last_time(traj),
                                    false, [&](const FlowState& st) {
                                      const double bound =
                                          st.t > 0.0 ? std::max(-L, -n / st.t) : -L;
                                      return min_r(st) - (bound - allow);
                                    });
  r.threshold = 0.0;
  r.pass = std::isfinite(r.value) && r.value >= 0.0;
  r.eps_uniform = false;
  r.note = "margin over max(-L, -n/s) - allowance; L = " + std::to_string(L);
  return r;
}

BoundReport identity_residual(const Trajectory& traj, Interval window) {
  const RadialGrid& grid = traj.grid();
  const Background& bg = traj.background();
  const int dim = bg.dim();
  const bool normalized = traj.problem.frame == Frame::Normalized;
  const double sigma = bg.ric_sign();
  BoundReport r;
  r.name = "identity_residual";
  r.kind = Extremum::Sup;
  r.eps_uniform = false;
  r.window = {window.lo, window.hi};
  double worst = -kInf;
  const auto w_of = [&](const FlowState& st) {
    std::vector<double> w(st.u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = normalized ? st.udot[i] + st.u[i] : st.udot[i];
    return w;
  };
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const FlowState& cur = traj.states[k];
    const FlowState& prev = traj.states[k - 1];
    if (!in_window(cur.t, window.lo, window.hi)) continue;
    const double dt = cur.t - prev.t;
    const auto w = w_of(cur);
    const auto wp = w_of(prev);
    const FormRatios hess = complex_hessian(grid, bg, w, Stencil::Centered);
    double sup = 0.0;
    for (std::size_t i = grid.interior_begin(); i < grid.interior_end(); ++i) {
      const double a = cur.metric.radial[i];
      const double b = cur.metric.tangential_at(i);
      const double lap = hess.radial[i] / a + (dim - 1) * hess.tangential_at(i) / b;
      const double tr_theta = 1.0 / a + (dim - 1) / b;
      const double rhs = -sigma * tr_theta - (normalized ? dim : 0.0);
      sup = std::max(sup, std::fabs((w[i] - wp[i]) / dt - lap - rhs));
    }
    r.trace.emplace_back(cur.t, sup);
    worst = std::max(worst, sup);
  }
  if (r.trace.empty()) {
    r.applicable = false;
    r.pass = true;
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.note = "needs consecutive states inside the window";
    return r;
  }
  r.value = worst;
  r.pass = std::isfinite(worst);
  return r;
}

OrderReport observed_order(const std::vector<double>& errors, double lo, double hi) {
  if (errors.size() < 2) throw ResolutionError("observed_order needs at least two levels");
  OrderReport rep;
  rep.errors = errors;
  rep.min_order = kInf;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double p = std::log2(errors[k] / errors[k + 1]);
    rep.orders.push_back(p);
    rep.min_order = std::min(rep.min_order, p);
  }
  rep.pass = std::all_of(rep.orders.begin(), rep.orders.end(),
                         [&](double p) { return std::isfinite(p) && p >= lo && p <= hi; });
  return rep;
}

ComparisonVerdict comparison_test(const FlowState& state, const FlowProblem& problem,
                                  const std::vector<double>& f0, const std::vector<double>& q,
                                  double dt, int steps, double tol) {
  const std::size_t n = problem.grid.size();
  if (f0.size() != n || q.size() != n) throw SizeError("comparison_test: data does not match grid");
  if (!(dt > 0.0) || steps < 1) throw ParameterError("comparison_test: need dt > 0 and steps >= 1");
  ComparisonVerdict v;
  const bool nonpositive = std::all_of(f0.begin(), f0.end(), [](double x) { return x <= 0.0; }) &&
                           std::all_of(q.begin(), q.end(), [](double x) { return x <= 0.0; });
  if (!nonpositive) return v;
  v.applicable = true;
  const Tridiagonal w = linearized_operator(state, problem);
  Tridiagonal a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.lower[i] = -dt * w.lower[i];
    a.diag[i] = 1.0 - dt * w.diag[i];
    a.upper[i] = -dt * w.upper[i];
  }
  std::vector<double> f = f0;
  std::vector<double> rhs(n);
  v.max_f = *std::max_element(f.begin(), f.end());
  for (int k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] = f[i] + dt * q[i];
    f = solve_tridiagonal(a, rhs);
    v.max_f = std::max(v.max_f, *std::max_element(f.begin(), f.end()));
  }
  v.pass = v.max_f <= tol;
  return v;
}

ComparisonSuite comparison_suite(const Trajectory& traj, int cases, std::uint64_t seed,
                                 double tol) {
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (traj.states[k].t > 0.0) eligible.push_back(k);
  }
  if (eligible.empty()) throw ResolutionError("comparison_suite: no accepted state with t > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = traj.grid().size();
  ComparisonSuite suite;
  suite.worst = -kInf;
  for (int c = 0; c < cases; ++c) {
    const std::size_t pick = eligible[static_cast<std::size_t>(unit(rng) * eligible.size()) %
                                      eligible.size()];
    std::vector<double> f0(n), q(n);
    const bool forced = unit(rng) < 0.5;
    for (std::size_t i = 0; i < n; ++i) {
      // Mix of small and order-one magnitudes, some exact zeros.
      const double mag = std::pow(10.0, -6.0 * unit(rng));
      f0[i] = unit(rng) < 0.1 ? 0.0 : -mag * unit(rng);
      q[i] = forced ? -std::pow(10.0, -6.0 * unit(rng)) * unit(rng) : 0.0;
    }
    const double dt = std::pow(10.0, -3.0 + 3.0 * unit(rng));
    const int steps = 5 + static_cast<int>(unit(rng) * 20.0);
    const ComparisonVerdict v = comparison_test(traj.states[pick], traj.problem, f0, q, dt, steps, tol);
    ++suite.cases;
    if (v.applicable && v.pass) ++suite.passed;
    suite.worst = std::max(suite.worst, v.max_f);
  }
  suite.pass = suite.passed == suite.cases;
  return suite;
}

MMatrixSurvey jacobian_survey(const Trajectory& traj, int samples) {
  std::map<double, double> dt_at;
  for (const StepRecord& s : traj.steps) dt_at[s.t] = s.dt;
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    if (traj.states[k].t > 0.0 && dt_at.count(traj.states[k].t)) eligible.push_back(k);
  }
  std::vector<std::size_t> chosen = eligible;
  if (samples > 0 && static_cast<std::size_t>(samples) < eligible.size()) {
    chosen.clear();
    for (int j = 0; j < samples; ++j) {
      chosen.push_back(eligible[(j * (eligible.size() - 1)) / std::max(1, samples - 1)]);
    }
  }
  MMatrixSurvey s;
  for (std::size_t k : chosen) {
    const FlowState& st = traj.states[k];
    const Tridiagonal j = scheme_jacobian(st, dt_at[st.t], traj.problem);
    ++s.checked;
    if (!is_m_matrix_pattern(j)) ++s.violations;
  }
  s.pass = s.checked > 0 && s.violations == 0;
  return s;
}

UniformityEntry epsilon_uniformity(const std::string& name, const std::vector<double>& eps,
                                   const std::vector<BoundReport>& reports, double factor,
                                   double floor) {
  if (eps.size() != reports.size() || reports.empty()) {
    throw SizeError("epsilon_uniformity: one report per eps level required");
  }
  UniformityEntry e;
  e.name = name;
  e.eps = eps;
  std::vector<double> mags;
  for (const BoundReport& r : reports) {
    e.values.push_back(r.value);
    const double m = r.kind == Extremum::Sup ? std::max(r.value, 0.0) : std::max(-r.value, 0.0);
    mags.push_back(m);
  }
  e.base = mags.front();
  e.worst = *std::max_element(mags.begin(), mags.end());
  e.ratio = e.base > 0.0 ? e.worst / e.base : (e.worst > floor ? kInf : 1.0);
  const bool finite = std::all_of(e.values.begin(), e.values.end(),
                                  [](double v) { return std::isfinite(v); });
  e.pass = finite && e.worst <= factor * e.base + floor;
  e.settling = finite;
  for (std::size_t k = 1; k + 1 < mags.size(); ++k) {
    const double prev = std::fabs(mags[k] - mags[k - 1]);
    const double next = std::fabs(mags[k + 1] - mags[k]);
    e.settling = e.settling && (next <= 0.5 * prev || next <= floor);
  }
  return e;
}

std::vector<std::string> known_checks() {
  return {"upper", "lower", "trace", "equivalence", "completeness",
          "ke",    "udot_longtime", "scalar", "identity"};
}

std::vector<BoundReport> run_check(const std::string& name, const Trajectory& traj,
                                   const HypothesisSpec& spec) {
  const double T = last_time(traj);
  const double s = spec.s;
  const double s1 = std::min(1.0, 0.5 * s);
  const auto not_applicable = [&](std::string why) {
    BoundReport r;
    r.name = name;
    r.applicable = false;
    r.pass = true;
    r.value = std::numeric_limits<double>::quiet_NaN();
    r.eps_uniform = false;
    r.note = std::move(why);
    return std::vector<BoundReport>{r};
  };
  const bool normalized = traj.problem.frame == Frame::Normalized;
  if (name == "scalar") {
    if (normalized) return not_applicable("needs an unnormalized trajectory");
    return {scalar_lower_unnormalized(traj)};
  }
  if (!normalized) return not_applicable("needs a normalized trajectory");
  if (name == "upper") return upper_bounds(traj);
  if (name == "lower") return lower_bounds(traj, spec);
  if (name == "trace") return {trace_bound(traj, s, s1)};
  if (name == "equivalence") return {uniform_equivalence(traj, std::min(0.1, 0.5 * s1), s1)};
  if (name == "completeness") {
    for (const FlowState& st : traj.states) {
      if (std::fabs(st.t - 0.1) <= 1e-12) return {completeness(traj, st.t)};
    }
    return {completeness(traj, T)};
  }
  if (name == "ke") return {ke_report(traj, T)};
  if (name == "udot_longtime") return {udot_lower_longtime(traj)};
  if (name == "identity") {
    double first = T;
    for (const FlowState& st : traj.states) {
      if (st.t > 0.0) {
        first = st.t;
        break;
      }
    }
    return {identity_residual(traj, {first, T})};
  }
  throw ParameterError("unknown check '" + name + "'");
}

}  // namespace crflow
