#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pdm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kInputError = 2,
  kNumericalError = 3,
  kConfigError = 4,
};

// Runs "pdm <subcommand> [flags]"; args excludes the program name.
// Progress and warnings go to err, summaries to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Deterministic train/evaluation split: a unit trains iff its id hashes below fraction.
bool in_training_split(const std::string& unit_id, double fraction);

}  // namespace pdm::cli
