#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crflow {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,     // malformed config or snapshot, bad arguments
  kExitSolver = 2,      // Newton or positivity failure
  kExitHypothesis = 3,  // hypotheses violated, or a selected check failed
  kExitNoLimit = 4,     // sweep without a certified diagonal limit
};

struct CliOptions {
  std::string config;
  std::string trajectory;
  std::string out;  // empty: config output_dir, then $CRFLOW_OUT, then "."
  std::vector<std::string> checks;
  std::string direction = "unnormalized";
  int jobs = 1;
};

int cmd_run(const CliOptions& opts, std::ostream& log);
int cmd_sweep(const CliOptions& opts, std::ostream& log);
int cmd_check(const CliOptions& opts, std::ostream& log);
int cmd_convert(const CliOptions& opts, std::ostream& log);

int cli_main(int argc, char** argv);

}  // namespace crflow
