#pragma once

#include <iosfwd>
#include <string>

#include "crflow/diagnostics.hpp"
#include "crflow/flow.hpp"
#include "crflow/ladder.hpp"
#include "json.hpp"

namespace crflow {

using Json = nlohmann::json;

/// {t, eps, rho0, grid: {n_nodes, rho_hat_max}, u, udot, metric_ratio
///  [, metric_ratio_tangential]}. An infinite rho0 (no cutoff) is null.
Json snapshot_to_json(const FlowState& state, const RadialGrid& grid);

/// Whole trajectory: problem description, step log and snapshots, plus the
/// config digest and tool version. `hypotheses` is carried for `check`.
Json trajectory_to_json(const Trajectory& traj, const HypothesisSpec& hypotheses = {});

struct LoadedTrajectory {
  Trajectory trajectory;
  HypothesisSpec hypotheses;
};

/// Inverse of trajectory_to_json. Throws SnapshotError on anything that is
/// not a valid accepted trajectory (shape, finiteness, positivity, times).
LoadedTrajectory trajectory_from_json(const Json& doc);

LoadedTrajectory read_trajectory(const std::string& path);
void write_json(const std::string& path, const Json& doc);

/// Columns: t, node, rho_hat, u, udot, metric_ratio.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

Json report_to_json(const BoundReport& r);
/// Columns: name, t, value (one row per checkpoint of every report).
void write_reports_csv(std::ostream& out, const std::vector<BoundReport>& reports);

Json uniformity_to_json(const UniformityReport& rep);
Json diagonal_limit_to_json(const DiagonalLimit& lim, const SweepResult& sw);

/// Snapshot file name for a ladder point, e.g. run_eps1.000e-02_rmax20.00.json.
std::string ladder_file_name(double eps, double rho_hat_max);

}  // namespace crflow
