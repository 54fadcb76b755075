#include "crflow/ladder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <thread>

#include "crflow/errors.hpp"

namespace crflow {

void LadderConfig::validate() const {
  if (eps.empty() || rho_hat_max.empty()) throw ParameterError("ladder schedules must be nonempty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ParameterError("ladder eps levels must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw ParameterError("ladder eps must decrease");
  }
  for (std::size_t i = 0; i < rho_hat_max.size(); ++i) {
    if (i > 0 && !(rho_hat_max[i] > rho_hat_max[i - 1])) {
      throw ParameterError("ladder rho_hat_max must increase");
    }
  }
  if (!rho0.empty() && rho0.size() != rho_hat_max.size()) {
    throw ParameterError("ladder rho0 needs one entry per rho_hat_max level");
  }
  for (std::size_t i = 0; i < rho_hat_max.size(); ++i) {
    if (!(rho0_at(i) >= 1.0)) throw ParameterError("ladder rho0 must be >= 1");
  }
  if (!(horizon > 0.0)) throw ParameterError("ladder horizon must be positive");
  if (!(window.lo >= 0.0 && window.hi > window.lo && window.hi <= rho_hat_max.front())) {
    throw ParameterError("ladder window must lie inside the smallest domain");
  }
  if (!(cauchy_tol > 0.0) || !(contraction > 1.0) || !(uniformity_factor >= 1.0)) {
    throw ParameterError("ladder tolerances out of range");
  }
}

double LadderConfig::rho0_at(std::size_t level) const {
  return rho0.empty() ? rho_hat_max[level] / 4.0 : rho0[level];
}

const LadderRun& SweepResult::at(std::size_t eps_level, std::size_t rho_level) const {
  return runs.at(eps_level * config.rho_hat_max.size() + rho_level);
}

RadialGrid ladder_grid(const LadderBase& base, double rho_hat_max) {
  const auto intervals = static_cast<std::size_t>(std::lround(rho_hat_max / base.spacing));
  return RadialGrid(intervals + 1, rho_hat_max);
}

namespace {

std::string point_label(double eps, double rho_hat_max) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "ladder point eps=%.3e rho_hat_max=%.2f: ", eps, rho_hat_max);
  return buf;
}

std::vector<BoundReport> attach_reports(const Trajectory& traj, const LadderConfig& cfg,
                                        const HypothesisSpec& spec) {
  const double s1 = std::min(1.0, 0.5 * spec.s);
  std::vector<BoundReport> out = upper_bounds(traj);
  for (BoundReport& r : lower_bounds(traj, spec, s1)) out.push_back(std::move(r));
  out.push_back(trace_bound(traj, spec.s, s1));
  out.push_back(uniform_equivalence(traj, std::min(0.1, 0.5 * s1), s1));
  for (const FlowState& st : traj.states) {
    if (std::fabs(st.t - cfg.completeness_time) <= 1e-12 * std::max(1.0, st.t)) {
      out.push_back(completeness(traj, st.t, cfg.kappa));
      break;
    }
  }
  return out;
}

}  // namespace

SweepResult sweep(const LadderConfig& config, const LadderBase& base, int jobs) {
  config.validate();
  const std::size_t ne = config.eps.size();
  const std::size_t nr = config.rho_hat_max.size();

  std::vector<RadialGrid> grids;
  for (double r : config.rho_hat_max) grids.push_back(ladder_grid(base, r));
  for (const RadialGrid& g : grids) {
    const HypothesisVerdict v = check_hypotheses(base.background, base.init, base.hypotheses, g);
    if (!v.passed()) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "hypotheses fail at rho_hat_max=%.2f (b: min ratio %.6g, a: lambda max %.6g, "
                    "exhaustion %.6g / %.6g)",
                    g.rho_hat_max(), v.min_ratio, v.lambda_max, v.exhaustion_sup,
                    v.exhaustion_bound);
      throw HypothesisFailure(buf);
    }
  }

  SweepResult result;
  result.config = config;
  std::vector<std::optional<LadderRun>> slots(ne * nr);
  std::vector<std::exception_ptr> errors(ne * nr);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < ne * nr; k = next++) {
      const std::size_t ie = k / nr;
      const std::size_t ir = k % nr;
      try {
        const Regularization reg{config.eps[ie], config.rho0_at(ir)};
        const RunSpec spec{FlowProblem::make(base.background, grids[ir], base.init, reg),
                           base.scheme,
                           config.horizon,
                           config.checkpoints,
                           true,
                           base.config_digest};
        Trajectory traj = run(spec);
        std::vector<BoundReport> reports = attach_reports(traj, config, base.hypotheses);
        slots[k] = LadderRun{reg.eps, config.rho_hat_max[ir], reg.rho0, std::move(traj),
                             std::move(reports)};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(ne * nr)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k]) continue;
    const std::string where = point_label(config.eps[k / nr], config.rho_hat_max[k % nr]);
    try {
      std::rethrow_exception(errors[k]);
    } catch (const StepFailure& e) {
      throw StepFailure(where + e.what(), e.time(), e.residual());
    } catch (const PositivityError& e) {
      throw PositivityError(where + e.what(), e.node());
    }
  }
  result.runs.reserve(slots.size());
  for (auto& slot : slots) result.runs.push_back(std::move(*slot));
  return result;
}

double interpolate_cubic(const RadialGrid& grid, const std::vector<double>& values, double x) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw SizeError("interpolate_cubic: values do not match the grid");
  if (!(x >= 0.0 && x <= grid.rho_hat_max())) throw DomainError("interpolate_cubic: x off grid");
  std::size_t j = std::min(static_cast<std::size_t>(x / grid.spacing()), n - 2);
  while (j + 1 < n - 1 && grid.node(j + 1) <= x) ++j;
  while (j > 0 && grid.node(j) > x) --j;
  const std::size_t first = std::min(j > 0 ? j - 1 : 0, n - 4);
  double sum = 0.0;
  for (std::size_t a = first; a < first + 4; ++a) {
    double w = 1.0;
    for (std::size_t b = first; b < first + 4; ++b) {
      if (b != a) w *= (x - grid.node(b)) / (grid.node(a) - grid.node(b));
    }
    sum += w * values[a];
  }
  return sum;
}

namespace {

double window_difference(const LadderRun& a, const LadderRun& b, const RadialGrid& target,
                         const Interval& window, double t) {
  const FlowState& sa = a.trajectory.at_time(t);
  const FlowState& sb = b.trajectory.at_time(t);
  double worst = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double x = target.node(i);
    if (x < window.lo || x > window.hi) continue;
    const double va = interpolate_cubic(a.trajectory.grid(), sa.u, x);
    const double vb = interpolate_cubic(b.trajectory.grid(), sb.u, x);
    worst = std::max(worst, std::fabs(va - vb));
  }
  return worst;
}

bool contracting(const std::vector<double>& d, double factor, double tol) {
  if (d.empty()) return false;
  if (d.size() == 1) return d[0] <= tol;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    if (!(d[k + 1] <= d[k] / factor || d[k + 1] <= tol)) return false;
  }
  return true;
}

}  // namespace

DiagonalLimit diagonal_limit(const SweepResult& sw) {
  const LadderConfig& cfg = sw.config;
  const std::size_t ne = cfg.eps.size();
  const std::size_t nr = cfg.rho_hat_max.size();
  DiagonalLimit lim;
  lim.candidate = sw.runs.empty() ? 0 : sw.runs.size() - 1;
  if (ne < 3 || nr < 2) {
    lim.verdict = "no limit: needs at least 3 eps levels and 2 rho_hat_max levels";
    return lim;
  }
  const RadialGrid& coarse = sw.at(0, 0).trajectory.grid();
  std::vector<double> times = cfg.checkpoints;
  times.push_back(cfg.horizon);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const double t_min = sw.at(0, 0).trajectory.states.size() > 1
                           ? sw.at(0, 0).trajectory.states[1].t
                           : 0.0;

  lim.eps_differences.assign(ne - 1, 0.0);
  lim.rho_differences.assign(nr - 1, 0.0);
  for (double t : times) {
    if (t < t_min || t > cfg.horizon) continue;
    DifferenceRow row;
    row.t = t;
    for (std::size_t ie = 0; ie + 1 < ne; ++ie) {
      const double d = window_difference(sw.at(ie, nr - 1), sw.at(ie + 1, nr - 1), coarse,
                                         cfg.window, t);
      row.eps_diffs.push_back(d);
      lim.eps_differences[ie] = std::max(lim.eps_differences[ie], d);
    }
    for (std::size_t ir = 0; ir + 1 < nr; ++ir) {
      const double d = window_difference(sw.at(ne - 1, ir), sw.at(ne - 1, ir + 1), coarse,
                                         cfg.window, t);
      row.rho_diffs.push_back(d);
      lim.rho_differences[ir] = std::max(lim.rho_differences[ir], d);
    }
    lim.table.push_back(std::move(row));
  }
  lim.eps_contracting = contracting(lim.eps_differences, cfg.contraction, cfg.cauchy_tol);
  lim.rho_contracting = contracting(lim.rho_differences, cfg.contraction, cfg.cauchy_tol);
  lim.certified = lim.eps_contracting && lim.rho_contracting;
  lim.verdict = lim.certified ? "limit candidate certified"
                              : std::string("no limit: ") +
                                    (lim.eps_contracting ? "" : "eps differences do not contract ") +
                                    (lim.rho_contracting ? "" : "rho_hat_max differences do not contract");
  return lim;
}

UniformityReport uniformity_report(const SweepResult& sw) {
  const LadderConfig& cfg = sw.config;
  const std::size_t ne = cfg.eps.size();
  const std::size_t nr = cfg.rho_hat_max.size();
  UniformityReport rep;
  rep.pass = true;
  for (std::size_t ir = 0; ir < nr; ++ir) {
    const LadderRun& first = sw.at(0, ir);
    for (std::size_t j = 0; j < first.reports.size(); ++j) {
      const BoundReport& proto = first.reports[j];
      if (!proto.eps_uniform) continue;
      std::vector<BoundReport> column;
      bool applicable = true;
      for (std::size_t ie = 0; ie < ne; ++ie) {
        const BoundReport& r = sw.at(ie, ir).reports.at(j);
        applicable = applicable && r.applicable;
        column.push_back(r);
      }
      if (!applicable) continue;
      char label[64];
      std::snprintf(label, sizeof label, "%s@rho_hat_max=%.2f", proto.name.c_str(),
                    cfg.rho_hat_max[ir]);
      UniformityEntry e = epsilon_uniformity(label, cfg.eps, column, cfg.uniformity_factor,
                                             cfg.uniformity_floor);
      rep.pass = rep.pass && e.pass;
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

std::vector<BoundReport> completeness_across(const SweepResult& sw) {
  const LadderConfig& cfg = sw.config;
  std::vector<BoundReport> out;
  for (std::size_t ir = 0; ir < cfg.rho_hat_max.size(); ++ir) {
    BoundReport r = completeness(sw.at(cfg.eps.size() - 1, ir).trajectory, cfg.completeness_time,
                                 cfg.kappa);
    char label[64];
    std::snprintf(label, sizeof label, "completeness@rho_hat_max=%.2f", cfg.rho_hat_max[ir]);
    r.name = label;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace crflow
