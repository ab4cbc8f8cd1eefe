#pragma once

#include <string>
#include <vector>

#include "trapsim/config.hpp"

namespace trapsim {

struct RunOutcome {
  std::string out_dir;
  std::vector<std::string> files;  // relative paths, sorted; excludes run_info.json
};

// Execute a validated config end to end and write its artifact set under the
// resolved output directory. Resolution order: TRAPSIM_OUT_DIR environment
// override, then config.out_dir. Every run writes manifest.json first (a pure
// function of the config, so reruns are byte-identical) and run_info.json
// last (wall time; excluded from any byte comparison). If the run throws
// after the directory exists, a FAILED marker file holding the message is
// left behind and the exception propagates.
RunOutcome run_experiment(const ExperimentConfig& config);

std::string manifest_json(const ExperimentConfig& config, const std::string& out_source);

}  // namespace trapsim
