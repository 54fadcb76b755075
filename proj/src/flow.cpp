#include "crflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "crflow/errors.hpp"

namespace crflow {

std::string to_string(Frame frame) {
  return frame == Frame::Normalized ? "normalized" : "unnormalized";
}

Frame frame_from_string(const std::string& s) {
  if (s == "normalized") return Frame::Normalized;
  if (s == "unnormalized") return Frame::Unnormalized;
  throw ParameterError("unknown frame '" + s + "'");
}

void SchemeConfig::validate() const {
  if (!(t_min > 0.0)) throw ParameterError("scheme.t_min must be positive");
  if (!(ratio > 1.0)) throw ParameterError("scheme.ratio must exceed 1");
  if (!(dt_max > 0.0)) throw ParameterError("scheme.dt_max must be positive");
  if (!(newton_tol > 0.0)) throw ParameterError("scheme.newton_tol must be positive");
  if (max_newton_iters < 1) throw ParameterError("scheme.max_newton_iters must be >= 1");
  if (!(positivity_floor > 0.0)) throw ParameterError("scheme.positivity_floor must be positive");
  if (max_halvings < 0) throw ParameterError("scheme.max_halvings must be >= 0");
}

SchemeConfig SchemeConfig::refined(double factor) const {
  SchemeConfig c = *this;
  c.t_min /= factor;
  c.ratio = 1.0 + (ratio - 1.0) / factor;
  c.dt_max /= factor;
  return c;
}

FlowProblem FlowProblem::make(const Background& bg, const RadialGrid& grid,
                              const InitialData& init, const Regularization& reg, Frame frame) {
  return FlowProblem{bg, grid, regularize_initial(init, reg.eps, reg.rho0, bg, grid),
                     init.lambda_on(grid, bg), reg, frame};
}

const FlowState& Trajectory::at_time(double t) const {
  for (const FlowState& s : states) {
    if (std::fabs(s.t - t) <= 1e-12 * std::max(1.0, std::fabs(t))) return s;
  }
  throw ParameterError("trajectory has no checkpoint at t=" + std::to_string(t));
}

FormRatios regularize_initial(const InitialData& init, double eps, double rho0,
                              const Background& bg, const RadialGrid& grid) {
  if (!(eps >= 0.0)) throw ParameterError("regularization eps must be >= 0");
  if (!(rho0 >= 1.0)) throw ParameterError("cutoff radius rho0 must be >= 1");
  FormRatios out = init.form_on(grid, bg);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double eta = std::isinf(rho0) ? 1.0 : cutoff_eta(bg.exhaustion(grid.node(i)) / rho0);
    out.radial[i] = eta * out.radial[i] + (1.0 - eta) + eps;
    if (out.has_tangential()) out.tangential[i] = eta * out.tangential[i] + (1.0 - eta) + eps;
  }
  return out;
}

FormRatios build_alpha(double t, const FormRatios& gamma0, const Background& bg) {
  if (!(t >= 0.0)) throw ParameterError("build_alpha: t must be >= 0");
  const double sigma = bg.ric_sign();
  const double decay = std::exp(-t);
  FormRatios a = gamma0;
  for (double& v : a.radial) v = -sigma + decay * (sigma + v);
  for (double& v : a.tangential) v = -sigma + decay * (sigma + v);
  return a;
}

FormRatios build_unnormalized_reference(double s, const FormRatios& gamma0, const Background& bg) {
  const double sigma = bg.ric_sign();
  FormRatios a = gamma0;
  for (double& v : a.radial) v -= s * sigma;
  for (double& v : a.tangential) v -= s * sigma;
  return a;
}

std::vector<double> chern_laplacian_radial(const std::vector<double>& u, const RadialGrid& grid,
                                           const Background& bg) {
  if (grid.size() < 3) throw SizeError("chern_laplacian_radial needs at least 3 nodes");
  const FormRatios h = complex_hessian(grid, bg, u, Stencil::Centered);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = h.trace(i, bg.dim());
  return out;
}

namespace {

struct Assembly {
  FormRatios metric;
  std::vector<double> log_det;
  bool positive = true;
  std::size_t first_bad = 0;
};

Assembly assemble(const std::vector<double>& u, const FormRatios& reference,
                  const HessianStencil& st, const Background& bg, double floor) {
  const std::size_t n = u.size();
  Assembly a;
  a.metric = reference;
  const auto hr = st.radial.apply(u);
  for (std::size_t i = 0; i + 1 < n; ++i) a.metric.radial[i] += hr[i];
  if (a.metric.has_tangential()) {
    const auto ht = st.tangential.apply(u);
    for (std::size_t i = 0; i + 1 < n; ++i) a.metric.tangential[i] += ht[i];
  }
  a.log_det.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a.metric.min_eigen(i) > floor)) {
      a.positive = false;
      a.first_bad = i;
      return a;
    }
    a.log_det[i] = a.metric.log_det(i, bg.dim());
  }
  return a;
}

// Rows 0..n-2 of sum_k (mult_k / eigen_k) * stencil_k; tail row zero.
Tridiagonal weighted_operator(const FormRatios& metric, const HessianStencil& st, int dim) {
  const std::size_t n = metric.size();
  Tridiagonal w(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double wr = 1.0 / metric.radial[i];
    w.lower[i] = wr * st.radial.lower[i];
    w.diag[i] = wr * st.radial.diag[i];
    w.upper[i] = wr * st.radial.upper[i];
    if (dim > 1) {
      const double wt = (dim - 1) / metric.tangential[i];
      w.lower[i] += wt * st.tangential.lower[i];
      w.diag[i] += wt * st.tangential.diag[i];
      w.upper[i] += wt * st.tangential.upper[i];
    }
  }
  return w;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

FormRatios reference_for(const FlowProblem& p, double t) {
  return p.frame == Frame::Normalized ? build_alpha(t, p.gamma0, p.background)
                                      : build_unnormalized_reference(t, p.gamma0, p.background);
}

double exact_tail(const FlowProblem& p, double t) {
  const double c = p.gamma0.radial.back();
  return p.frame == Frame::Normalized ? tail_ode_value(t, c, p.background.dim())
                                      : tail_ode_value_unnormalized(t, c, p.background.dim());
}

Tridiagonal jacobian_from_metric(const FormRatios& metric, const HessianStencil& st, double dt,
                                 const FlowProblem& p, const SchemeConfig* cfg) {
  const double damping = p.frame == Frame::Normalized ? 1.0 : 0.0;
  Tridiagonal j = weighted_operator(metric, st, p.background.dim());
  const std::size_t n = j.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    j.lower[i] *= -dt;
    j.upper[i] *= -dt;
    j.diag[i] = 1.0 + dt * damping - dt * j.diag[i];
  }
  const bool dirichlet = cfg != nullptr && cfg->closure == TailClosure::ExactQuadrature;
  j.lower[n - 1] = 0.0;
  j.diag[n - 1] = dirichlet ? 1.0 : 1.0 + dt * damping;
  return j;
}

StepResult newton_step(const FlowState& state, double dt, const SchemeConfig& cfg,
                       const FlowProblem& p) {
  if (!(dt > 0.0)) throw ParameterError("step: dt must be positive");
  const std::size_t n = p.grid.size();
  if (state.u.size() != n) throw SizeError("step: state does not match the grid");
  const bool normalized = p.frame == Frame::Normalized;
  const double damping = normalized ? 1.0 : 0.0;
  const double t_new = state.t + dt;
  const FormRatios ref = reference_for(p, t_new);
  const HessianStencil st = hessian_stencil(p.grid, p.background, Stencil::Monotone);
  const bool dirichlet = cfg.closure == TailClosure::ExactQuadrature;
  const double tail_value = dirichlet ? exact_tail(p, t_new) : 0.0;

  const auto residual = [&](const std::vector<double>& u, const Assembly& a) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = (1.0 + dt * damping) * u[i] - state.u[i] - dt * a.log_det[i];
    }
    if (dirichlet) g[n - 1] = u[n - 1] - tail_value;
    return g;
  };

  std::vector<double> u = state.u;
  Assembly a = assemble(u, ref, st, p.background, cfg.positivity_floor);
  if (!a.positive) {
    throw PositivityError("step: initial guess leaves the positive cone", a.first_bad);
  }
  std::vector<double> g = residual(u, a);
  double norm = sup_norm(g);
  int iters = 0;
  while (norm > cfg.newton_tol) {
    if (iters >= cfg.max_newton_iters) {
      throw StepFailure("Newton did not converge", t_new, norm);
    }
    ++iters;
    const Tridiagonal j = jacobian_from_metric(a.metric, st, dt, p, &cfg);
    const std::vector<double> delta = solve_tridiagonal(j, g);
    double theta = 1.0;
    bool accepted = false;
    bool ever_positive = false;
    std::size_t bad = 0;
    for (int h = 0; h <= cfg.max_halvings; ++h, theta *= 0.5) {
      std::vector<double> cand(n);
      for (std::size_t i = 0; i < n; ++i) cand[i] = u[i] - theta * delta[i];
      Assembly ca = assemble(cand, ref, st, p.background, cfg.positivity_floor);
      if (!ca.positive) {
        bad = ca.first_bad;
        continue;
      }
      ever_positive = true;
      std::vector<double> cg = residual(cand, ca);
      const double cn = sup_norm(cg);
      if (cn < norm || cn <= cfg.newton_tol) {
        u = std::move(cand);
        a = std::move(ca);
        g = std::move(cg);
        norm = cn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!ever_positive) throw PositivityError("step: positivity unrecoverable", bad);
      throw StepFailure("line search stalled", t_new, norm);
    }
  }

  StepResult r;
  r.state.t = t_new;
  r.state.eps = state.eps;
  r.state.rho0 = state.rho0;
  r.state.metric = std::move(a.metric);
  r.state.udot.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.state.udot[i] = a.log_det[i] - damping * u[i];
  if (dirichlet) {
    // Dirichlet node: report the tail ODE right-hand side.
    r.state.udot[n - 1] = a.log_det[n - 1] - damping * u[n - 1];
  }
  r.state.u = std::move(u);
  r.newton_iterations = iters;
  r.residual = norm;
  return r;
}

// Adaptive Simpson with Richardson correction.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

}  // namespace

FormRatios scheme_metric(const std::vector<double>& u, const FormRatios& reference,
                         const RadialGrid& grid, const Background& bg) {
  if (u.size() != grid.size()) throw SizeError("scheme_metric: values do not match the grid");
  const HessianStencil st = hessian_stencil(grid, bg, Stencil::Monotone);
  Assembly a = assemble(u, reference, st, bg, -std::numeric_limits<double>::infinity());
  return a.metric;
}

std::vector<double> ma_log_ratio(const std::vector<double>& u, const FormRatios& reference,
                                 const RadialGrid& grid, const Background& bg) {
  const FormRatios m = scheme_metric(u, reference, grid, bg);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(m.min_eigen(i) > 0.0)) throw PositivityError("ma_log_ratio: non-positive eigenvalue", i);
    out[i] = m.log_det(i, bg.dim());
  }
  return out;
}

StepResult step(const FlowState& state, double dt, const SchemeConfig& config,
                const FlowProblem& problem) {
  if (problem.frame != Frame::Normalized) throw ParameterError("step: problem is unnormalized");
  return newton_step(state, dt, config, problem);
}

StepResult step_unnormalized(const FlowState& state, double ds, const SchemeConfig& config,
                             const FlowProblem& problem) {
  if (problem.frame != Frame::Unnormalized) {
    throw ParameterError("step_unnormalized: problem is normalized");
  }
  return newton_step(state, ds, config, problem);
}

Tridiagonal scheme_jacobian(const FlowState& state, double dt, const FlowProblem& problem) {
  const HessianStencil st = hessian_stencil(problem.grid, problem.background, Stencil::Monotone);
  return jacobian_from_metric(state.metric, st, dt, problem, nullptr);
}

Tridiagonal linearized_operator(const FlowState& state, const FlowProblem& problem) {
  const HessianStencil st = hessian_stencil(problem.grid, problem.background, Stencil::Monotone);
  return weighted_operator(state.metric, st, problem.background.dim());
}

double tail_ode_value(double t, double c, int dim) {
  if (!(t >= 0.0)) throw ParameterError("tail_ode_value: t must be >= 0");
  if (!(c > 0.0)) throw DomainError("tail_ode_value: tail coefficient must be positive");
  if (t == 0.0 || c == 1.0) return 0.0;
  const auto integrand = [c, dim](double s) {
    return dim * std::exp(s) * std::log1p((c - 1.0) * std::exp(-s));
  };
  return std::exp(-t) * adaptive_simpson(integrand, 0.0, t, 1e-14);
}

double boundary_value(double t, double eps) { return tail_ode_value(t, 1.0 + eps, 1); }

double tail_ode_value_unnormalized(double s, double c, int dim) {
  if (!(c > 0.0)) throw DomainError("tail_ode_value_unnormalized: coefficient must be positive");
  return dim * ((c + s) * std::log(c + s) - c * std::log(c) - s);
}

std::vector<double> time_grid(const SchemeConfig& scheme, double horizon,
                              const std::vector<double>& checkpoints) {
  scheme.validate();
  if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  std::vector<double> targets;
  for (double c : checkpoints) {
    if (c > 0.0 && c < horizon) targets.push_back(c);
  }
  targets.push_back(horizon);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  std::vector<double> out{0.0};
  double t = 0.0;
  std::size_t next_target = 0;
  while (next_target < targets.size()) {
    const double dt = t == 0.0 ? scheme.t_min : std::min(scheme.dt_max, t * (scheme.ratio - 1.0));
    double next = t + dt;
    const double target = targets[next_target];
    if (next >= target - 1e-12 * std::max(1.0, target)) {
      next = target;
      ++next_target;
    }
    out.push_back(next);
    t = next;
  }
  return out;
}

Trajectory run(const RunSpec& spec) {
  const FlowProblem& p = spec.problem;
  spec.scheme.validate();
  for (std::size_t i = 0; i < p.gamma0.size(); ++i) {
    if (!(p.gamma0.min_eigen(i) > 0.0)) {
      throw HypothesisFailure(
          "degenerate initial form at node " + std::to_string(i) +
          ": a run needs eps > 0 (the eps = 0 limit is reached through the ladder)");
    }
  }
  const std::vector<double> times = time_grid(spec.scheme, spec.horizon, spec.checkpoints);
  const auto is_checkpoint = [&](double t) {
    if (t == spec.horizon) return true;
    return std::any_of(spec.checkpoints.begin(), spec.checkpoints.end(), [t](double c) {
      return std::fabs(c - t) <= 1e-12 * std::max(1.0, c);
    });
  };

  Trajectory traj{p, {}, {}, spec.config_digest};
  const std::size_t n = p.grid.size();
  FlowState state;
  state.t = 0.0;
  state.u.assign(n, 0.0);
  state.eps = p.reg.eps;
  state.rho0 = p.reg.rho0;
  state.metric = reference_for(p, 0.0);
  state.udot.resize(n);
  for (std::size_t i = 0; i < n; ++i) state.udot[i] = state.metric.log_det(i, p.background.dim());
  traj.states.push_back(state);

  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    StepResult r = newton_step(state, dt, spec.scheme, p);
    r.state.t = times[k];
    traj.steps.push_back({times[k], dt, r.newton_iterations, r.residual});
    state = std::move(r.state);
    if (spec.record_every_step || is_checkpoint(state.t)) traj.states.push_back(state);
  }
  return traj;
}

FlowState to_unnormalized(const FlowState& st, int dim) {
  FlowState out = st;
  const double s = std::expm1(st.t);
  const double scale = 1.0 + s;
  const double offset = dim * (st.t + std::expm1(-st.t));  // n (t - 1 + e^{-t})
  out.t = s;
  for (std::size_t i = 0; i < st.u.size(); ++i) {
    out.u[i] = scale * (st.u[i] + offset);
    out.udot[i] = st.udot[i] + st.u[i] + dim * st.t;
  }
  for (double& v : out.metric.radial) v *= scale;
  for (double& v : out.metric.tangential) v *= scale;
  return out;
}

FlowState from_unnormalized(const FlowState& st, int dim) {
  FlowState out = st;
  const double t = std::log1p(st.t);
  const double scale = 1.0 + st.t;
  const double offset = dim * (t + std::expm1(-t));
  out.t = t;
  for (std::size_t i = 0; i < st.u.size(); ++i) {
    out.u[i] = st.u[i] / scale - offset;
    out.udot[i] = st.udot[i] - out.u[i] - dim * t;
  }
  for (double& v : out.metric.radial) v /= scale;
  for (double& v : out.metric.tangential) v /= scale;
  return out;
}

Trajectory to_unnormalized(const Trajectory& traj) {
  if (traj.problem.frame != Frame::Normalized) {
    throw ParameterError("to_unnormalized: trajectory is already unnormalized");
  }
  Trajectory out = traj;
  out.problem.frame = Frame::Unnormalized;
  const int dim = traj.problem.background.dim();
  for (FlowState& s : out.states) s = to_unnormalized(s, dim);
  for (StepRecord& r : out.steps) {
    const double s0 = std::expm1(r.t - r.dt);
    r.t = std::expm1(r.t);
    r.dt = r.t - s0;
  }
  return out;
}

Trajectory from_unnormalized(const Trajectory& traj) {
  if (traj.problem.frame != Frame::Unnormalized) {
    throw ParameterError("from_unnormalized: trajectory is already normalized");
  }
  Trajectory out = traj;
  out.problem.frame = Frame::Normalized;
  const int dim = traj.problem.background.dim();
  for (FlowState& s : out.states) s = from_unnormalized(s, dim);
  for (StepRecord& r : out.steps) {
    const double t0 = std::log1p(r.t - r.dt);
    r.t = std::log1p(r.t);
    r.dt = r.t - t0;
  }
  return out;
}

PotentialReconstruction potential_integral(const Trajectory& traj) {
  if (traj.problem.frame != Frame::Normalized) {
    throw ParameterError("potential_integral: needs a normalized trajectory");
  }
  if (traj.states.size() < 8) {
    throw ResolutionError("potential_integral: needs at least 8 checkpoints");
  }
  if (traj.states.front().t != 0.0) {
    throw ResolutionError("potential_integral: first checkpoint must be t = 0");
  }
  const std::size_t n = traj.grid().size();
  PotentialReconstruction rec;
  std::vector<double> integral(n, 0.0);
  std::vector<double> prev(n);
  const FlowState& first = traj.states.front();
  for (std::size_t i = 0; i < n; ++i) prev[i] = first.u[i] + first.udot[i];
  rec.times.push_back(0.0);
  rec.u.push_back(std::vector<double>(n, 0.0));
  double prev_t = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const FlowState& st = traj.states[k];
    const double h = st.t - prev_t;
    std::vector<double> u_rec(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = st.u[i] + st.udot[i];
      integral[i] += 0.5 * h * (std::exp(prev_t) * prev[i] + std::exp(st.t) * w);
      prev[i] = w;
      u_rec[i] = std::exp(-st.t) * integral[i];
      rec.sup_difference = std::max(rec.sup_difference, std::fabs(u_rec[i] - st.u[i]));
    }
    rec.times.push_back(st.t);
    rec.u.push_back(std::move(u_rec));
    prev_t = st.t;
  }
  return rec;
}

}  // namespace crflow
