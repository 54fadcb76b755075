#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crflow/flow.hpp"
#include "crflow/geometry.hpp"
#include "crflow/ladder.hpp"
#include "crflow/serialize.hpp"

namespace crflow {

/// A validated run configuration (see schemas/run_config.schema.json).
struct RunConfig {
  Background background = Background::poincare_disc();
  InitialData initial = InitialData::stationary();
  Regularization reg;
  HypothesisSpec hypotheses;
  std::size_t n_nodes = 257;
  double rho_hat_max = 10.0;
  SchemeConfig scheme;
  Frame frame = Frame::Normalized;
  double horizon = 1.0;
  std::vector<double> checkpoints;
  bool record_all = true;
  std::string output_dir;               // empty when not configured
  std::optional<Json> ladder_section;   // raw "ladder" object, if any
  std::string digest;                   // "sha256:<hex>" of the canonical document

  RadialGrid grid() const;
  RunSpec run_spec() const;
  LadderBase ladder_base() const;
  LadderConfig ladder_config() const;  // defaults filled from the run settings
};

/// The published schema, compiled into the library.
const Json& run_config_schema();

/// Structural validation against a JSON Schema subset (type, enum, required,
/// properties, additionalProperties, items, min/maxItems, minimum, maximum,
/// exclusiveMinimum). Throws ConfigError naming the dotted path.
void validate_against_schema(const Json& doc, const Json& schema, const std::string& path = "");

/// Schema validation, then semantic checks and defaults.
RunConfig parse_config(const Json& doc);

/// Reads and parses a file; syntax errors are reported with line and column.
RunConfig load_config(const std::string& path);

std::string sha256_hex(const std::string& bytes);

/// Digest of the canonical (sorted-key, compact) document without output_dir.
std::string config_digest(const Json& doc);

}  // namespace crflow
