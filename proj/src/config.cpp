#include "crflow/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "crflow/errors.hpp"
#include "crflow/schema_embed.hpp"

namespace crflow {

const Json& run_config_schema() {
  static const Json schema = Json::parse(detail::kRunConfigSchema);
  return schema;
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

bool has_type(const Json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (!v.is_number_float()) return false;
    const double d = v.get<double>();
    return std::isfinite(d) && d == std::floor(d);
  }
  return false;
}

std::string where(const std::string& path) { return path.empty() ? "<root>" : path; }

}  // namespace

void validate_against_schema(const Json& doc, const Json& schema, const std::string& path) {
  if (schema.contains("type")) {
    const Json& t = schema["type"];
    bool ok = false;
    std::string expected;
    if (t.is_string()) {
      ok = has_type(doc, t.get<std::string>());
      expected = t.get<std::string>();
    } else {
      for (const Json& alt : t) {
        ok = ok || has_type(doc, alt.get<std::string>());
        expected += (expected.empty() ? "" : " or ") + alt.get<std::string>();
      }
    }
    if (!ok) throw ConfigError(where(path), "expected " + expected);
  }
  if (schema.contains("enum")) {
    const Json& options = schema["enum"];
    if (std::find(options.begin(), options.end(), doc) == options.end()) {
      throw ConfigError(where(path), "must be one of " + options.dump());
    }
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (schema.contains("minimum") && !(v >= schema["minimum"].get<double>())) {
      throw ConfigError(where(path), "must be >= " + schema["minimum"].dump());
    }
    if (schema.contains("maximum") && !(v <= schema["maximum"].get<double>())) {
      throw ConfigError(where(path), "must be <= " + schema["maximum"].dump());
    }
    if (schema.contains("exclusiveMinimum") && !(v > schema["exclusiveMinimum"].get<double>())) {
      throw ConfigError(where(path), "must be > " + schema["exclusiveMinimum"].dump());
    }
  }
  if (doc.is_object()) {
    if (schema.contains("required")) {
      for (const Json& key : schema["required"]) {
        const std::string k = key.get<std::string>();
        if (!doc.contains(k)) throw ConfigError(join(path, k), "missing required field");
      }
    }
    const Json empty = Json::object();
    const Json& props = schema.contains("properties") ? schema["properties"] : empty;
    const bool closed = schema.contains("additionalProperties") &&
                        schema["additionalProperties"].is_boolean() &&
                        !schema["additionalProperties"].get<bool>();
    for (const auto& [k, v] : doc.items()) {
      if (props.contains(k)) {
        validate_against_schema(v, props[k], join(path, k));
      } else if (closed) {
        throw ConfigError(join(path, k), "unknown field");
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>()) {
      throw ConfigError(where(path), "needs at least " + schema["minItems"].dump() + " items");
    }
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>()) {
      throw ConfigError(where(path), "allows at most " + schema["maxItems"].dump() + " items");
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        validate_against_schema(doc[i], schema["items"], where(path) + "[" + std::to_string(i) + "]");
      }
    }
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string config_digest(const Json& doc) {
  Json canonical = doc;
  if (canonical.is_object()) canonical.erase("output_dir");
  return "sha256:" + sha256_hex(canonical.dump());
}

namespace {

double num(const Json& obj, const char* key, double fallback) {
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

std::vector<double> numbers(const Json& arr) {
  std::vector<double> out;
  for (const Json& v : arr) out.push_back(v.get<double>());
  return out;
}

InitialData parse_initial(const Json& j) {
  const std::string preset = j["preset"].get<std::string>();
  if (preset == "stationary") return InitialData::stationary();
  if (preset == "homogeneous") return InitialData::homogeneous(num(j, "c", 0.5));
  if (preset == "degenerate") return InitialData::degenerate();
  if (preset == "bump") return InitialData::bump(num(j, "radius", 2.0));
  if (preset == "tail_decay") return InitialData::tail_decay();
  if (!j.contains("table")) throw ConfigError("initial.table", "missing required field");
  std::vector<std::pair<double, double>> pts;
  for (const Json& p : j["table"]) pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  try {
    return InitialData::table(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("initial.table", e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError("initial.table", e.what());
  }
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  validate_against_schema(doc, run_config_schema());
  RunConfig c;
  c.digest = config_digest(doc);

  const Json& b = doc["background"];
  const std::string kind = b["kind"].get<std::string>();
  if (kind == "poincare_disc") {
    if (b.contains("dim") && b["dim"].get<int>() != 1) {
      throw ConfigError("background.dim", "the Poincare disc has dimension 1");
    }
    c.background = Background::poincare_disc();
  } else {
    const int dim = b.contains("dim") ? b["dim"].get<int>() : 2;
    if (dim < 2) throw ConfigError("background.dim", "the ball model needs dim >= 2");
    c.background = Background::hyperbolic_ball(dim);
  }

  c.initial = parse_initial(doc["initial"]);

  if (doc.contains("regularization")) {
    const Json& r = doc["regularization"];
    c.reg.eps = num(r, "eps", 0.0);
    if (r.contains("rho0") && !r["rho0"].is_null()) c.reg.rho0 = r["rho0"].get<double>();
  }
  if (doc.contains("hypotheses")) {
    const Json& h = doc["hypotheses"];
    c.hypotheses.s = num(h, "s", c.hypotheses.s);
    c.hypotheses.beta = num(h, "beta", c.hypotheses.beta);
  }

  c.n_nodes = doc["grid"]["n_nodes"].get<std::size_t>();
  c.rho_hat_max = doc["grid"]["rho_hat_max"].get<double>();
  try {
    (void)c.grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }

  if (doc.contains("scheme")) {
    const Json& s = doc["scheme"];
    SchemeConfig& sc = c.scheme;
    sc.t_min = num(s, "t_min", sc.t_min);
    sc.ratio = num(s, "ratio", sc.ratio);
    sc.dt_max = num(s, "dt_max", sc.dt_max);
    sc.newton_tol = num(s, "newton_tol", sc.newton_tol);
    sc.positivity_floor = num(s, "positivity_floor", sc.positivity_floor);
    if (s.contains("max_newton_iters")) sc.max_newton_iters = s["max_newton_iters"].get<int>();
    if (s.contains("max_halvings")) sc.max_halvings = s["max_halvings"].get<int>();
    if (s.contains("tail_closure")) {
      sc.closure = s["tail_closure"] == "exact_quadrature" ? TailClosure::ExactQuadrature
                                                           : TailClosure::DiscreteOde;
    }
  }
  if (doc.contains("frame")) c.frame = frame_from_string(doc["frame"].get<std::string>());
  c.horizon = doc["horizon"].get<double>();
  if (doc.contains("checkpoints")) {
    c.checkpoints = numbers(doc["checkpoints"]);
    for (std::size_t i = 0; i < c.checkpoints.size(); ++i) {
      if (c.checkpoints[i] > c.horizon) {
        throw ConfigError("checkpoints[" + std::to_string(i) + "]", "exceeds the horizon");
      }
    }
  }
  if (doc.contains("record")) c.record_all = doc["record"] == "all";
  if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
  if (doc.contains("ladder")) {
    c.ladder_section = doc["ladder"];
    try {
      c.ladder_config().validate();
    } catch (const ParameterError& e) {
      throw ConfigError("ladder", e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("<syntax>", path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                      ": " + e.what());
  }
  return parse_config(doc);
}

RadialGrid RunConfig::grid() const { return RadialGrid(n_nodes, rho_hat_max); }

RunSpec RunConfig::run_spec() const {
  return RunSpec{FlowProblem::make(background, grid(), initial, reg, frame), scheme, horizon,
                 checkpoints, record_all, digest};
}

LadderBase RunConfig::ladder_base() const {
  LadderBase base;
  base.background = background;
  base.init = initial;
  base.hypotheses = hypotheses;
  base.scheme = scheme;
  base.spacing = rho_hat_max / static_cast<double>(n_nodes - 1);
  base.config_digest = digest;
  return base;
}

LadderConfig RunConfig::ladder_config() const {
  LadderConfig l;
  l.horizon = horizon;
  for (double t : checkpoints) {
    if (std::find(l.checkpoints.begin(), l.checkpoints.end(), t) == l.checkpoints.end()) {
      l.checkpoints.push_back(t);
    }
  }
  std::sort(l.checkpoints.begin(), l.checkpoints.end());
  if (!ladder_section) return l;
  const Json& j = *ladder_section;
  if (j.contains("eps")) l.eps = numbers(j["eps"]);
  if (j.contains("rho_hat_max")) l.rho_hat_max = numbers(j["rho_hat_max"]);
  if (j.contains("rho0")) l.rho0 = numbers(j["rho0"]);
  if (j.contains("checkpoints")) l.checkpoints = numbers(j["checkpoints"]);
  l.horizon = num(j, "horizon", l.horizon);
  if (j.contains("window")) l.window = {j["window"][0].get<double>(), j["window"][1].get<double>()};
  l.cauchy_tol = num(j, "cauchy_tol", l.cauchy_tol);
  l.contraction = num(j, "contraction", l.contraction);
  l.uniformity_factor = num(j, "uniformity_factor", l.uniformity_factor);
  l.completeness_time = num(j, "completeness_time", l.completeness_time);
  l.kappa = num(j, "kappa", l.kappa);
  return l;
}

}  // namespace crflow
