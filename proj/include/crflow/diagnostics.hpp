#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crflow/flow.hpp"
#include "crflow/geometry.hpp"

namespace crflow {

enum class Extremum { Sup, Inf };

std::string to_string(Extremum e);
Extremum extremum_from_string(const std::string& s);

/// One checked functional. `value` is the sup (or inf) over the trace.
/// Without a threshold the verdict is finiteness only; the constants in the
/// estimates are existential, so uniformity in eps is judged across a ladder.
struct BoundReport {
  std::string name;
  Interval window{0.0, 0.0};
  std::vector<std::pair<double, double>> trace;  // (t, functional at t)
  Extremum kind = Extremum::Sup;
  double value = 0.0;
  std::optional<double> threshold;
  bool pass = false;
  bool applicable = true;
  bool eps_uniform = true;  // subject to the eps-uniformity gate
  std::string note;
};

/// sup u / min(t, 1) and sup udot (e^t - 1) / t over t > 0.
std::vector<BoundReport> upper_bounds(const Trajectory& traj);

/// Lower-bound functionals on (0, s):
///   u_envelope     inf (u - n t log(1 - e^{-t})) (1 - e^{-s}) / t
///   small_time     inf (udot + u - n log t) over t <= s1
///   udot_u_floor   inf (udot + u) over [t_min, s1]  (eps-dependent constant)
///   late_window    inf (udot + u)(1 - e^{s2-s}) / (1 + s2 e^{s2-s}) on [1, s2]
///   u_global       inf u (1 - e^{s1-s}) / (1 + s1 e^{s1-s}) on [0, s1]
/// s1 defaults to min(1, s/2), s2 to (1 + s)/2 (late window needs s > 1).
std::vector<BoundReport> lower_bounds(const Trajectory& traj, const HypothesisSpec& spec,
                                      std::optional<double> s1 = std::nullopt);

/// E = (1 + s1 e^{s1-s}) / ((1 - e^{-s})(1 - e^{s1-s})). Throws ParameterError
/// unless 0 < s1 < s.
double trace_constant(double s, double s1);

/// sup over (0, s1] of (1 - e^{-t}) log tr_h g / (E - log(1 - e^{-s})).
BoundReport trace_bound(const Trajectory& traj, double s, double s1);

/// max over [s0, s1] of max(a, 1/a) across the eigenvalue ratios of g.
BoundReport uniform_equivalence(const Trajectory& traj, double s0, double s1);

/// g(t)-length of the radial segment [0, rho_hat_max] over its h-length.
double completeness_slope(const FlowState& state, const RadialGrid& grid);
BoundReport completeness(const Trajectory& traj, double t, double kappa = 0.25);

struct AttainmentOptions {
  // Small-t checkpoints, increasing; the first is the discrepancy gate time.
  std::vector<double> times{1e-3, 2e-3, 4e-3};
  double tol = 5e-3;
};

/// Discrepancy between g(t) and g_0 on a compact coordinate window K inside
/// U = {lambda > 0}: sup_K |a - lambda| and its first two divided
/// differences. Throws DomainError if K is not inside U or leaves the grid.
struct AttainmentReport {
  BoundReport discrepancy;  // D0 trace over the small-t checkpoints
  std::vector<double> times;
  std::vector<double> d0, d1, d2;
  bool decay_monotone = false;
  bool pass = false;
};

AttainmentReport initial_attainment(const Trajectory& traj, Interval k,
                                    const AttainmentOptions& opts = {});

/// sup over interior nodes of |Ric(g) + g|_g, i.e. max_k |ric_k + a_k| / a_k
/// over the eigenvalue ratios.
double ke_residual(const FlowState& state, const RadialGrid& grid, const Background& bg);
BoundReport ke_report(const Trajectory& traj, double t, double threshold = 1e-3);

/// sup over interior nodes of |a - 1| across the eigenvalue ratios.
double sup_interior_deviation(const FlowState& state, const RadialGrid& grid);

/// sup over [2, T] of max(0, -udot) e^{t/2}; non-increasing over [T/2, T].
/// Not applicable when T < 6.
BoundReport udot_lower_longtime(const Trajectory& traj);

/// Chern scalar curvature tr_g Ric(g) per interior node.
std::vector<double> scalar_curvature(const FlowState& state, const RadialGrid& grid,
                                     const Background& bg);

/// min interior R(g(s)) >= max(-L, -n/s) - allowance at every checkpoint of an
/// unnormalized trajectory; L = -inf R(g(0)). Allowance defaults to 10 Delta^2.
BoundReport scalar_lower_unnormalized(const Trajectory& traj,
                                      std::optional<double> allowance = std::nullopt);

/// Residual of (d/dt - Laplacian_g)(udot + u) = tr_g theta_0 - n with a
/// backward time difference between consecutive stored states; sup over
/// interior nodes and states with t in the window.
BoundReport identity_residual(const Trajectory& traj, Interval window);

struct OrderReport {
  std::vector<double> errors;
  std::vector<double> orders;  // log2 of successive ratios
  double min_order = 0.0;
  bool pass = false;
};

/// Observed orders for a sequence of errors under successive halving.
OrderReport observed_order(const std::vector<double>& errors, double lo, double hi = 1e300);

/// Backward-Euler evolution of (I - dt W) f^{k+1} = f^k + dt q with W the
/// frozen linearization at an accepted state (tail row: pure ODE).
struct ComparisonVerdict {
  bool applicable = false;
  double max_f = 0.0;
  bool pass = false;
};

ComparisonVerdict comparison_test(const FlowState& state, const FlowProblem& problem,
                                  const std::vector<double>& f0, const std::vector<double>& q,
                                  double dt, int steps, double tol = 1e-12);

struct ComparisonSuite {
  int cases = 0;
  int passed = 0;
  double worst = 0.0;
  bool pass = false;
};

/// Random nonpositive data and forcing on the given states, reproducible
/// from the seed.
ComparisonSuite comparison_suite(const Trajectory& traj, int cases, std::uint64_t seed,
                                 double tol = 1e-12);

/// Exact M-matrix sign pattern of the scheme Jacobian at every stored step
/// (or at `samples` evenly spaced ones when samples > 0).
struct MMatrixSurvey {
  int checked = 0;
  int violations = 0;
  bool pass = false;
};

MMatrixSurvey jacobian_survey(const Trajectory& traj, int samples = 0);

/// eps-uniformity: magnitudes m = max(F, 0) (sup) or max(-F, 0) (inf) across a
/// ladder ordered from the largest eps; pass iff max m <= factor m_0 + floor.
struct UniformityEntry {
  std::string name;
  std::vector<double> eps;
  std::vector<double> values;
  double base = 0.0;
  double worst = 0.0;
  double ratio = 1.0;
  bool pass = false;
  // Successive magnitude increments shrink by at least half: the values
  // settle as eps -> 0 even when the factor gate fails.
  bool settling = false;
};

UniformityEntry epsilon_uniformity(const std::string& name, const std::vector<double>& eps,
                                   const std::vector<BoundReport>& reports, double factor = 1.25,
                                   double floor = 1e-6);

/// Named check dispatch shared by the CLI.
std::vector<std::string> known_checks();
std::vector<BoundReport> run_check(const std::string& name, const Trajectory& traj,
                                   const HypothesisSpec& spec);

}  // namespace crflow
