#pragma once

#include <string>
#include <vector>

#include "obscert/config.hpp"
#include "obscert/errors.hpp"

namespace obscert {

/// Process exit codes.
enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_hypothesis = 3,
  exit_infeasible = 4,
  exit_unsound = 5,
};

int exit_code(Stage stage);

struct CommandResult {
  int exit_code = exit_ok;
  std::vector<std::string> files;   ///< paths written, in order
  std::string summary;              ///< one line for the terminal
};

/// Hypothesis verification, certification and the soundness check for the
/// configured (f, E); writes <name>.report.json.
CommandResult cmd_certify(const RunConfig& cfg);

/// One certification per sweep point (|E| fractions, degrees n, or the
/// eigenfunction family); writes <name>.sweep.csv and <name>.report.json,
/// plus <name>.growth.csv for the family.
CommandResult cmd_sweep(const RunConfig& cfg);

/// Checks the explicitly configured Gevrey / doubling / UCP certificates.
CommandResult cmd_verify(const RunConfig& cfg);

}  // namespace obscert
