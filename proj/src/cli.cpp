#include "crflow/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crflow/config.hpp"
#include "crflow/errors.hpp"
#include "crflow/version.hpp"

namespace crflow {

namespace fs = std::filesystem;

namespace {

std::string output_dir(const CliOptions& opts, const std::string& configured) {
  if (!opts.out.empty()) return opts.out;
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("CRFLOW_OUT"); env != nullptr && *env != '\0') return env;
  return ".";
}

fs::path prepare(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// Maps the library's exceptions onto exit codes; everything else escapes.
template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: invalid config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const SnapshotError& e) {
    log << "error: invalid snapshot: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const HypothesisFailure& e) {
    log << "error: hypothesis failure: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const StepFailure& e) {
    log << "error: solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const PositivityError& e) {
    log << "error: solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ResolutionError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

Json stamp(Json j, const std::string& digest) {
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config_digest"] = digest;
  return j;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

Json run_summary(const Trajectory& traj) {
  Json cps = Json::array();
  double sup_u = 0.0;
  double min_metric = std::numeric_limits<double>::infinity();
  for (const FlowState& st : traj.states) {
    const double su = sup_abs(st.u);
    sup_u = std::max(sup_u, su);
    for (std::size_t i = 0; i < st.metric.size(); ++i) {
      min_metric = std::min(min_metric, st.metric.min_eigen(i));
    }
    cps.push_back({{"t", st.t}, {"sup_abs_u", su}, {"sup_abs_udot", sup_abs(st.udot)}});
  }
  int newton = 0;
  for (const StepRecord& s : traj.steps) newton += s.newton_iterations;
  const FlowState& last = traj.states.back();
  Json j;
  j["frame"] = to_string(traj.problem.frame);
  j["background"] = to_string(traj.background().kind());
  j["dim"] = traj.background().dim();
  j["n_nodes"] = traj.grid().size();
  j["rho_hat_max"] = traj.grid().rho_hat_max();
  j["final_time"] = last.t;
  j["steps"] = traj.steps.size();
  j["newton_iterations"] = newton;
  j["sup_abs_u"] = sup_u;
  j["min_metric_ratio"] = min_metric;
  if (traj.problem.frame == Frame::Normalized) {
    j["final_ke_residual"] = ke_residual(last, traj.grid(), traj.background());
    j["final_sup_interior_deviation"] = sup_interior_deviation(last, traj.grid());
  }
  j["states"] = cps;
  return stamp(std::move(j), traj.config_digest);
}

bool is_listed(double t, const std::vector<double>& times) {
  if (t == 0.0) return true;
  for (double c : times) {
    if (std::fabs(t - c) <= 1e-12 * std::max(1.0, c)) return true;
  }
  return false;
}

Trajectory checkpoints_only(const Trajectory& traj, const std::vector<double>& times) {
  Trajectory out = traj;
  out.states.clear();
  for (const FlowState& st : traj.states) {
    if (is_listed(st.t, times)) out.states.push_back(st);
  }
  return out;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int cmd_run(const CliOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(opts.config);
    const HypothesisVerdict hv =
        check_hypotheses(cfg.background, cfg.initial, cfg.hypotheses, cfg.grid());
    if (!hv.passed()) {
      throw HypothesisFailure("initial data violates the standing hypotheses (min ratio " +
                              std::to_string(hv.min_ratio) + ")");
    }
    const Trajectory traj = run(cfg.run_spec());
    const fs::path dir = prepare(output_dir(opts, cfg.output_dir));
    write_json((dir / "trajectory.json").string(), trajectory_to_json(traj, cfg.hypotheses));
    {
      std::ofstream csv(dir / "trajectory.csv");
      write_trajectory_csv(csv, traj);
    }
    const Json summary = run_summary(traj);
    write_json((dir / "summary.json").string(), summary);
    log << "run: " << traj.steps.size() << " steps to t=" << traj.states.back().t
        << ", sup|u|=" << summary["sup_abs_u"].get<double>() << ", output in " << dir.string()
        << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep(const CliOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = load_config(opts.config);
    const LadderConfig lc = cfg.ladder_config();
    try {
      lc.validate();
    } catch (const ParameterError& e) {
      throw ConfigError("ladder", e.what());
    }
    const SweepResult sw = sweep(lc, cfg.ladder_base(), opts.jobs);
    const DiagonalLimit lim = diagonal_limit(sw);
    const UniformityReport uni = uniformity_report(sw);
    const std::vector<BoundReport> compl_reports = completeness_across(sw);

    const fs::path dir = prepare(output_dir(opts, cfg.output_dir));
    const fs::path runs_dir = dir / "runs";
    fs::create_directories(runs_dir);

    // All files are written here, on one thread, after the workers joined.
    Json runs = Json::array();
    for (const LadderRun& r : sw.runs) {
      const std::string name = ladder_file_name(r.eps, r.rho_hat_max);
      write_json((runs_dir / name).string(),
                 trajectory_to_json(checkpoints_only(r.trajectory, lc.checkpoints),
                                    cfg.hypotheses));
      Json reports = Json::array();
      for (const BoundReport& b : r.reports) reports.push_back(report_to_json(b));
      runs.push_back({{"eps", r.eps},
                      {"rho_hat_max", r.rho_hat_max},
                      {"rho0", r.rho0},
                      {"n_nodes", r.trajectory.grid().size()},
                      {"steps", r.trajectory.steps.size()},
                      {"file", "runs/" + name},
                      {"reports", reports}});
    }
    Json completeness_json = Json::array();
    bool compl_pass = true;
    for (const BoundReport& b : compl_reports) {
      completeness_json.push_back(report_to_json(b));
      compl_pass = compl_pass && b.pass;
    }
    Json manifest;
    manifest["generated_at"] = utc_now();
    manifest["ladder"] = {{"eps", lc.eps},
                          {"rho_hat_max", lc.rho_hat_max},
                          {"checkpoints", lc.checkpoints},
                          {"horizon", lc.horizon},
                          {"window", {lc.window.lo, lc.window.hi}},
                          {"cauchy_tol", lc.cauchy_tol},
                          {"contraction", lc.contraction},
                          {"uniformity_factor", lc.uniformity_factor},
                          {"completeness_time", lc.completeness_time},
                          {"kappa", lc.kappa}};
    manifest["runs"] = runs;
    manifest["diagonal_limit"] = diagonal_limit_to_json(lim, sw);
    manifest["uniformity"] = uniformity_to_json(uni);
    manifest["completeness"] = {{"reports", completeness_json}, {"pass", compl_pass}};
    write_json((dir / "manifest.json").string(), stamp(std::move(manifest), cfg.digest));

    log << "sweep: " << sw.runs.size() << " trajectories, " << lim.verdict << '\n';
    if (!uni.pass) {
      log << "warning: eps-uniformity gate fails for";
      for (const UniformityEntry& e : uni.entries) {
        if (!e.pass) log << ' ' << e.name;
      }
      log << '\n';
    }
    return static_cast<int>(lim.certified ? kExitOk : kExitNoLimit);
  });
}

int cmd_check(const CliOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const LoadedTrajectory lt = read_trajectory(opts.trajectory);
    std::vector<std::string> names = opts.checks;
    if (names.empty() || (names.size() == 1 && names[0] == "all")) names = known_checks();
    const std::vector<std::string> known = known_checks();
    for (const std::string& n : names) {
      if (std::find(known.begin(), known.end(), n) == known.end()) {
        throw ParameterError("unknown check '" + n + "'");
      }
    }
    std::vector<BoundReport> reports;
    for (const std::string& n : names) {
      for (BoundReport& r : run_check(n, lt.trajectory, lt.hypotheses)) {
        reports.push_back(std::move(r));
      }
    }
    bool all_pass = true;
    Json list = Json::array();
    for (const BoundReport& r : reports) {
      all_pass = all_pass && r.pass;
      list.push_back(report_to_json(r));
      log << (r.pass ? "PASS " : "FAIL ") << r.name << (r.applicable ? "" : " (not applicable)")
          << '\n';
    }
    const fs::path dir = prepare(output_dir(opts, ""));
    Json doc;
    doc["trajectory"] = opts.trajectory;
    doc["reports"] = list;
    doc["pass"] = all_pass;
    write_json((dir / "reports.json").string(), stamp(std::move(doc), lt.trajectory.config_digest));
    {
      std::ofstream csv(dir / "reports.csv");
      write_reports_csv(csv, reports);
    }
    return static_cast<int>(all_pass ? kExitOk : kExitHypothesis);
  });
}

int cmd_convert(const CliOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    const LoadedTrajectory lt = read_trajectory(opts.trajectory);
    const Frame target = frame_from_string(opts.direction);
    if (lt.trajectory.problem.frame == target) {
      throw ParameterError("trajectory is already " + to_string(target));
    }
    const Trajectory out = target == Frame::Unnormalized ? to_unnormalized(lt.trajectory)
                                                         : from_unnormalized(lt.trajectory);
    const fs::path dir = prepare(output_dir(opts, ""));
    const fs::path file = dir / ("trajectory_" + to_string(target) + ".json");
    write_json(file.string(), trajectory_to_json(out, lt.hypotheses));
    log << "convert: " << out.states.size() << " snapshots written to " << file.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Normalized Chern-Ricci flow simulator on the disc and the ball"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  CliOptions opts;
  std::string checks;

  auto* run_cmd = app.add_subcommand("run", "evolve one configuration");
  run_cmd->add_option("--config", opts.config, "JSON run configuration")->required();
  run_cmd->add_option("--out", opts.out, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "run the regularization ladder");
  sweep_cmd->add_option("--config", opts.config, "JSON run configuration")->required();
  sweep_cmd->add_option("--out", opts.out, "output directory");
  sweep_cmd->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* check_cmd = app.add_subcommand("check", "evaluate diagnostics on a trajectory");
  check_cmd->add_option("trajectory", opts.trajectory, "trajectory.json")->required();
  check_cmd->add_option("--checks", checks, "comma list, or 'all'");
  check_cmd->add_option("--out", opts.out, "output directory");

  auto* convert_cmd = app.add_subcommand("convert", "reparametrize a trajectory");
  convert_cmd->add_option("trajectory", opts.trajectory, "trajectory.json")->required();
  convert_cmd->add_option("--direction", opts.direction, "target frame")
      ->check(CLI::IsMember({"normalized", "unnormalized"}));
  convert_cmd->add_option("--out", opts.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  std::stringstream ss(checks);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) opts.checks.push_back(item);
  }

  if (*run_cmd) return cmd_run(opts, std::cerr);
  if (*sweep_cmd) return cmd_sweep(opts, std::cerr);
  if (*check_cmd) return cmd_check(opts, std::cerr);
  return cmd_convert(opts, std::cerr);
}

}  // namespace crflow
