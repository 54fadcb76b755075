#include "crflow/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "crflow/errors.hpp"
#include "crflow/version.hpp"

namespace crflow {

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SnapshotError(where + ": missing '" + key + "'");
  }
  return obj.at(key);
}

double number(const Json& obj, const char* key, const std::string& where) {
  const Json& v = member(obj, key, where);
  if (!v.is_number()) throw SnapshotError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SnapshotError(where + "." + key + ": not finite");
  return d;
}

std::vector<double> array(const Json& obj, const char* key, std::size_t n,
                          const std::string& where) {
  const Json& v = member(obj, key, where);
  if (!v.is_array() || v.size() != n) {
    throw SnapshotError(where + "." + key + ": expected an array of " + std::to_string(n) +
                        " numbers");
  }
  std::vector<double> out;
  out.reserve(n);
  for (const Json& x : v) {
    if (!x.is_number()) throw SnapshotError(where + "." + key + ": non-numeric entry");
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw SnapshotError(where + "." + key + ": non-finite entry");
    out.push_back(d);
  }
  return out;
}

Json form_json(const FormRatios& f) {
  Json j;
  j["radial"] = f.radial;
  if (f.has_tangential()) j["tangential"] = f.tangential;
  return j;
}

FormRatios form_from(const Json& j, std::size_t n, int dim, const std::string& where) {
  FormRatios f;
  f.radial = array(j, "radial", n, where);
  if (dim > 1) f.tangential = array(j, "tangential", n, where);
  return f;
}

}  // namespace

Json snapshot_to_json(const FlowState& st, const RadialGrid& grid) {
  Json j;
  j["t"] = st.t;
  j["eps"] = st.eps;
  j["rho0"] = finite_or_null(st.rho0);
  j["grid"] = {{"n_nodes", grid.size()}, {"rho_hat_max", grid.rho_hat_max()}};
  j["u"] = st.u;
  j["udot"] = st.udot;
  j["metric_ratio"] = st.metric.radial;
  if (st.metric.has_tangential()) j["metric_ratio_tangential"] = st.metric.tangential;
  return j;
}

Json trajectory_to_json(const Trajectory& traj, const HypothesisSpec& hyp) {
  const FlowProblem& p = traj.problem;
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config_digest"] = traj.config_digest;
  j["frame"] = to_string(p.frame);
  j["background"] = {{"kind", to_string(p.background.kind())}, {"dim", p.background.dim()}};
  j["grid"] = {{"n_nodes", p.grid.size()}, {"rho_hat_max", p.grid.rho_hat_max()}};
  j["regularization"] = {{"eps", p.reg.eps}, {"rho0", finite_or_null(p.reg.rho0)}};
  j["hypotheses"] = {{"s", hyp.s}, {"beta", hyp.beta}, {"f", hyp.f_name}};
  j["gamma0"] = form_json(p.gamma0);
  j["lambda"] = p.lambda;
  Json steps = Json::array();
  for (const StepRecord& s : traj.steps) {
    steps.push_back({{"t", s.t},
                     {"dt", s.dt},
                     {"newton_iterations", s.newton_iterations},
                     {"residual", s.residual}});
  }
  j["steps"] = std::move(steps);
  Json snaps = Json::array();
  for (const FlowState& st : traj.states) snaps.push_back(snapshot_to_json(st, p.grid));
  j["snapshots"] = std::move(snaps);
  return j;
}

LoadedTrajectory trajectory_from_json(const Json& doc) {
  if (!doc.is_object()) throw SnapshotError("trajectory document must be a JSON object");
  const std::string top = "trajectory";
  Frame frame;
  Background bg = Background::poincare_disc();
  try {
    frame = frame_from_string(member(doc, "frame", top).get<std::string>());
    const Json& b = member(doc, "background", top);
    const auto kind = background_kind_from_string(member(b, "kind", "background").get<std::string>());
    const int dim = member(b, "dim", "background").get<int>();
    bg = kind == BackgroundKind::PoincareDisc ? Background::poincare_disc()
                                              : Background::hyperbolic_ball(dim);
    if (bg.dim() != dim) throw SnapshotError("background: dim does not match kind");
  } catch (const ParameterError& e) {
    throw SnapshotError(e.what());
  } catch (const Json::exception& e) {
    throw SnapshotError(std::string("trajectory: ") + e.what());
  }
  const Json& g = member(doc, "grid", top);
  const double n_raw = number(g, "n_nodes", "grid");
  const double rmax = number(g, "rho_hat_max", "grid");
  if (n_raw != std::floor(n_raw) || n_raw < 0) throw SnapshotError("grid.n_nodes: not a count");
  const auto n = static_cast<std::size_t>(n_raw);
  std::optional<RadialGrid> grid;
  try {
    grid.emplace(n, rmax);
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("grid: ") + e.what());
  }
  const int dim = bg.dim();

  const Json& reg = member(doc, "regularization", top);
  Regularization r;
  r.eps = number(reg, "eps", "regularization");
  r.rho0 = member(reg, "rho0", "regularization").is_null() ? kNoCutoff
                                                           : number(reg, "rho0", "regularization");

  LoadedTrajectory out{Trajectory{FlowProblem{bg, *grid,
                                              form_from(member(doc, "gamma0", top), n, dim,
                                                        "gamma0"),
                                              array(doc, "lambda", n, top), r, frame},
                                  {},
                                  {},
                                  ""},
                       {}};
  if (doc.contains("config_digest") && doc["config_digest"].is_string()) {
    out.trajectory.config_digest = doc["config_digest"].get<std::string>();
  }
  if (doc.contains("hypotheses")) {
    const Json& h = doc["hypotheses"];
    out.hypotheses.s = number(h, "s", "hypotheses");
    out.hypotheses.beta = number(h, "beta", "hypotheses");
  }

  if (doc.contains("steps")) {
    const Json& steps = doc["steps"];
    if (!steps.is_array()) throw SnapshotError("steps: expected an array");
    for (const Json& s : steps) {
      StepRecord rec;
      rec.t = number(s, "t", "steps[]");
      rec.dt = number(s, "dt", "steps[]");
      rec.newton_iterations = static_cast<int>(number(s, "newton_iterations", "steps[]"));
      rec.residual = number(s, "residual", "steps[]");
      out.trajectory.steps.push_back(rec);
    }
  }

  const Json& snaps = member(doc, "snapshots", top);
  if (!snaps.is_array() || snaps.empty()) throw SnapshotError("snapshots: expected a nonempty array");
  double prev_t = -1.0;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const std::string where = "snapshots[" + std::to_string(k) + "]";
    const Json& s = snaps[k];
    const Json& sg = member(s, "grid", where);
    if (number(sg, "n_nodes", where + ".grid") != n_raw ||
        number(sg, "rho_hat_max", where + ".grid") != rmax) {
      throw SnapshotError(where + ".grid: does not match the trajectory grid");
    }
    FlowState st;
    st.t = number(s, "t", where);
    if (!(st.t >= 0.0) || !(st.t > prev_t)) {
      throw SnapshotError(where + ".t: times must be nonnegative and strictly increasing");
    }
    prev_t = st.t;
    st.eps = number(s, "eps", where);
    st.rho0 = member(s, "rho0", where).is_null() ? kNoCutoff : number(s, "rho0", where);
    st.u = array(s, "u", n, where);
    st.udot = array(s, "udot", n, where);
    st.metric.radial = array(s, "metric_ratio", n, where);
    if (dim > 1) st.metric.tangential = array(s, "metric_ratio_tangential", n, where);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(st.metric.min_eigen(i) > 0.0)) {
        throw SnapshotError(where + ".metric_ratio: non-positive entry at node " +
                            std::to_string(i));
      }
    }
    out.trajectory.states.push_back(std::move(st));
  }
  return out;
}

LoadedTrajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SnapshotError("cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SnapshotError(path + ": " + e.what());
  }
  return trajectory_from_json(doc);
}

void write_json(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << doc.dump(1) << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const RadialGrid& g = traj.grid();
  out << "t,node,rho_hat,u,udot,metric_ratio\n";
  char buf[192];
  for (const FlowState& st : traj.states) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g\n", st.t, i, g.node(i),
                    st.u[i], st.udot[i], st.metric.radial[i]);
      out << buf;
    }
  }
}

Json report_to_json(const BoundReport& r) {
  Json j;
  j["name"] = r.name;
  j["window"] = {finite_or_null(r.window.lo), finite_or_null(r.window.hi)};
  Json trace = Json::array();
  for (const auto& [t, v] : r.trace) trace.push_back({t, finite_or_null(v)});
  j["functional_trace"] = std::move(trace);
  j["sup_or_inf"] = to_string(r.kind);
  j["value"] = finite_or_null(r.value);
  j["threshold"] = r.threshold ? Json(*r.threshold) : Json(nullptr);
  j["pass"] = r.pass;
  j["applicable"] = r.applicable;
  j["eps_uniform"] = r.eps_uniform;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

void write_reports_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
  out << "name,t,value\n";
  char buf[128];
  for (const BoundReport& r : reports) {
    for (const auto& [t, v] : r.trace) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", t, v);
      out << r.name << buf;
    }
  }
}

Json uniformity_to_json(const UniformityReport& rep) {
  Json entries = Json::array();
  for (const UniformityEntry& e : rep.entries) {
    Json values = Json::array();
    for (double v : e.values) values.push_back(finite_or_null(v));
    entries.push_back({{"name", e.name},
                       {"eps", e.eps},
                       {"values", values},
                       {"base", e.base},
                       {"worst", e.worst},
                       {"ratio", finite_or_null(e.ratio)},
                       {"settling", e.settling},
                       {"pass", e.pass}});
  }
  return {{"entries", entries}, {"pass", rep.pass}};
}

Json diagonal_limit_to_json(const DiagonalLimit& lim, const SweepResult& sw) {
  Json table = Json::array();
  for (const DifferenceRow& row : lim.table) {
    table.push_back({{"t", row.t}, {"eps_diffs", row.eps_diffs}, {"rho_diffs", row.rho_diffs}});
  }
  Json j = {{"eps_differences", lim.eps_differences},
            {"rho_hat_max_differences", lim.rho_differences},
            {"eps_contracting", lim.eps_contracting},
            {"rho_hat_max_contracting", lim.rho_contracting},
            {"certified", lim.certified},
            {"verdict", lim.verdict},
            {"table", table}};
  if (lim.certified && lim.candidate < sw.runs.size()) {
    const LadderRun& c = sw.runs[lim.candidate];
    j["candidate"] = ladder_file_name(c.eps, c.rho_hat_max);
  } else {
    j["candidate"] = nullptr;
  }
  return j;
}

std::string ladder_file_name(double eps, double rho_hat_max) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "run_eps%.3e_rmax%.2f.json", eps, rho_hat_max);
  return buf;
}

}  // namespace crflow
