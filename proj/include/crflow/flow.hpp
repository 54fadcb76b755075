#pragma once

#include <limits>
#include <string>
#include <vector>

#include "crflow/cutoff.hpp"
#include "crflow/geometry.hpp"
#include "crflow/grid.hpp"

namespace crflow {

enum class Frame { Normalized, Unnormalized };

std::string to_string(Frame frame);
Frame frame_from_string(const std::string& s);

// How the node at the truncation radius is advanced.
enum class TailClosure {
  // The homogeneous tail ODE, discretized with the same backward-Euler step
  // as the interior. Keeps spatially constant data exactly constant.
  DiscreteOde,
  // Dirichlet data from the exact tail ODE solution (adaptive quadrature).
  ExactQuadrature,
};

struct SchemeConfig {
  // Time ramp: first step to t_min, then dt = min(dt_max, t (ratio - 1)).
  double t_min = 1e-4;
  double ratio = 1.5;
  double dt_max = 0.05;
  double newton_tol = 1e-10;
  int max_newton_iters = 50;
  double positivity_floor = 1e-12;
  int max_halvings = 40;
  TailClosure closure = TailClosure::DiscreteOde;

  void validate() const;
  // Every step of the ramp divided by `factor` (t_min, ratio - 1, dt_max).
  SchemeConfig refined(double factor) const;
};

inline constexpr double kNoCutoff = std::numeric_limits<double>::infinity();

struct Regularization {
  double eps = 0.0;
  double rho0 = kNoCutoff;  // cutoff radius of the exhaustion collar
};

/// Everything a stepper needs besides the state: background, grid and the
/// per-node coefficient of the (regularized) initial form against theta_0.
struct FlowProblem {
  Background background;
  RadialGrid grid;
  FormRatios gamma0;
  std::vector<double> lambda;  // unregularized profile, for attainment checks
  Regularization reg;
  Frame frame = Frame::Normalized;

  static FlowProblem make(const Background& bg, const RadialGrid& grid, const InitialData& init,
                          const Regularization& reg, Frame frame = Frame::Normalized);
};

/// Snapshot of the flow. In the unnormalized frame `t` is the unnormalized
/// time s, `u` the potential phi and `udot` its time derivative.
struct FlowState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> udot;
  FormRatios metric;  // omega(t) / theta_0
  double eps = 0.0;
  double rho0 = kNoCutoff;
};

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;
  int newton_iterations = 0;
  double residual = 0.0;
};

struct Trajectory {
  FlowProblem problem;
  std::vector<FlowState> states;
  std::vector<StepRecord> steps;
  std::string config_digest;

  const FlowState& at_time(double t) const;  // exact match; throws ParameterError
  const Background& background() const noexcept { return problem.background; }
  const RadialGrid& grid() const noexcept { return problem.grid; }
};

/// Coefficient of eta(rho/rho0) omega_0 + (1 - eta) theta_0 + eps theta_0
/// against theta_0 at every node. rho0 = kNoCutoff keeps eta = 1.
FormRatios regularize_initial(const InitialData& init, double eps, double rho0,
                              const Background& bg, const RadialGrid& grid);

/// alpha(t) / theta_0 = -sigma + e^{-t} (sigma + gamma0), sigma the Einstein
/// constant of the background.
FormRatios build_alpha(double t, const FormRatios& gamma0, const Background& bg);

/// (omega_0 - s Ric(theta_0)) / theta_0 for the unnormalized flow.
FormRatios build_unnormalized_reference(double s, const FormRatios& gamma0, const Background& bg);

/// h^{ij-bar} d_i d_j-bar u, i.e. the trace of the complex Hessian against h.
std::vector<double> chern_laplacian_radial(const std::vector<double>& u, const RadialGrid& grid,
                                           const Background& bg);

/// (reference + i dd-bar u) / theta_0 as the scheme assembles it: monotone
/// stencil on rows 0..n-2, reference only on the tail row.
FormRatios scheme_metric(const std::vector<double>& u, const FormRatios& reference,
                         const RadialGrid& grid, const Background& bg);

/// log((reference + i dd-bar u)^n / theta_0^n) per node, with the scheme's
/// stencil and tail row. Throws PositivityError at the first non-positive
/// eigenvalue.
std::vector<double> ma_log_ratio(const std::vector<double>& u, const FormRatios& reference,
                                 const RadialGrid& grid, const Background& bg);

struct StepResult {
  FlowState state;
  int newton_iterations = 0;
  double residual = 0.0;
};

/// One backward-Euler step of du/dt = log det(alpha + i dd-bar u) - u.
StepResult step(const FlowState& state, double dt, const SchemeConfig& config,
                const FlowProblem& problem);

/// One backward-Euler step of dphi/ds = log det(omega_0 - s Ric + i dd-bar phi).
StepResult step_unnormalized(const FlowState& state, double ds, const SchemeConfig& config,
                             const FlowProblem& problem);

/// Jacobian of the backward-Euler residual for a step of size dt landing on
/// `state` (normalized or unnormalized according to problem.frame).
Tridiagonal scheme_jacobian(const FlowState& state, double dt, const FlowProblem& problem);

/// Linearization of the log-determinant at `state`: the Chern Laplacian of
/// g(t) with the scheme's stencil, zero on the tail row.
Tridiagonal linearized_operator(const FlowState& state, const FlowProblem& problem);

/// Tail ODE solution e^{-t} int_0^t e^s log(1 + eps e^{-s}) ds (dimension 1).
double boundary_value(double t, double eps);

/// Homogeneous solution for a constant initial coefficient c:
/// e^{-t} int_0^t e^s n log(1 + (c - 1) e^{-s}) ds, by adaptive Simpson.
double tail_ode_value(double t, double c, int dim);

/// Homogeneous unnormalized potential int_0^s n log(c + r) dr (closed form).
double tail_ode_value_unnormalized(double s, double c, int dim);

struct RunSpec {
  FlowProblem problem;
  SchemeConfig scheme;
  double horizon = 1.0;
  std::vector<double> checkpoints;  // times every run must land on
  bool record_every_step = true;
  std::string config_digest;
};

/// Times visited by the ramp from 0 to the horizon, checkpoints included.
std::vector<double> time_grid(const SchemeConfig& scheme, double horizon,
                              const std::vector<double>& checkpoints);

/// Advance from t = 0 to the horizon. Deterministic in the spec.
Trajectory run(const RunSpec& spec);

FlowState to_unnormalized(const FlowState& state, int dim);
FlowState from_unnormalized(const FlowState& state, int dim);
Trajectory to_unnormalized(const Trajectory& traj);
Trajectory from_unnormalized(const Trajectory& traj);

struct PotentialReconstruction {
  std::vector<double> times;
  std::vector<std::vector<double>> u;
  double sup_difference = 0.0;  // against the evolved u
};

/// u(t) = e^{-t} int_0^t e^s log(omega^n / theta_0^n) ds by the trapezoidal
/// rule over the stored checkpoints (first checkpoint must be t = 0).
PotentialReconstruction potential_integral(const Trajectory& traj);

}  // namespace crflow
