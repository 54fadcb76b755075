#pragma once

#include <string>
#include <vector>

#include "crflow/diagnostics.hpp"
#include "crflow/flow.hpp"
#include "crflow/geometry.hpp"

namespace crflow {

struct LadderConfig {
  std::vector<double> eps{1e-1, 1e-2, 1e-3};          // decreasing
  std::vector<double> rho_hat_max{10.0, 20.0, 40.0};  // increasing
  std::vector<double> rho0;                           // empty: rho_hat_max / 4
  std::vector<double> checkpoints{1e-3, 2e-3, 4e-3, 0.1, 0.5, 1.0};
  double horizon = 2.0;
  Interval window{0.0, 2.0};  // comparison window, grid coordinate
  double cauchy_tol = 1e-6;
  double contraction = 2.0;
  double uniformity_factor = 1.25;
  double uniformity_floor = 1e-6;
  double completeness_time = 0.1;
  double kappa = 0.25;

  void validate() const;
  double rho0_at(std::size_t level) const;
};

/// What every ladder point shares. Grids keep the spacing of the base grid.
struct LadderBase {
  Background background = Background::poincare_disc();
  InitialData init = InitialData::degenerate();
  HypothesisSpec hypotheses;
  SchemeConfig scheme;
  double spacing = 10.0 / 256.0;
  std::string config_digest;
};

struct LadderRun {
  double eps = 0.0;
  double rho_hat_max = 0.0;
  double rho0 = 0.0;
  Trajectory trajectory;
  std::vector<BoundReport> reports;
};

/// Runs are stored eps-major: index = eps_level * n_rho + rho_level.
struct SweepResult {
  LadderConfig config;
  std::vector<LadderRun> runs;

  const LadderRun& at(std::size_t eps_level, std::size_t rho_level) const;
};

/// Grid for one truncation radius at the base spacing.
RadialGrid ladder_grid(const LadderBase& base, double rho_hat_max);

/// Checks the hypotheses at every ladder grid first (HypothesisFailure), then
/// runs all points on `jobs` worker threads. Output order does not depend on
/// `jobs`. A failing point aborts the sweep; the error names the point.
SweepResult sweep(const LadderConfig& config, const LadderBase& base, int jobs = 1);

/// Cubic (four-point Lagrange) interpolation of nodal values at x.
double interpolate_cubic(const RadialGrid& grid, const std::vector<double>& values, double x);

struct DifferenceRow {
  double t = 0.0;
  std::vector<double> eps_diffs;  // at the finest rho_hat_max
  std::vector<double> rho_diffs;  // at the finest eps
};

struct DiagonalLimit {
  std::vector<double> eps_differences;  // sup over checkpoints, one per successive pair
  std::vector<double> rho_differences;
  std::vector<DifferenceRow> table;
  bool eps_contracting = false;
  bool rho_contracting = false;
  bool certified = false;
  std::size_t candidate = 0;  // index into SweepResult::runs
  std::string verdict;
};

DiagonalLimit diagonal_limit(const SweepResult& sweep);

struct UniformityReport {
  std::vector<UniformityEntry> entries;  // names carry the rho_hat_max level
  bool pass = false;
};

UniformityReport uniformity_report(const SweepResult& sweep);

/// Completeness slope at the finest eps for every truncation radius.
std::vector<BoundReport> completeness_across(const SweepResult& sweep);

}  // namespace crflow
