#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "uct/config.hpp"

namespace uct {

// Missing inputs, missing prerequisite artifacts, malformed data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite losses and other numerical breakdowns.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& pipeline_commands() {
  static const std::vector<std::string> commands = {
      "prepare", "train-lm", "train-wfst", "train-seq2seq",
      "decode",  "evaluate", "analyze",    "all"};
  return commands;
}

bool valid_command(const std::string& command);

// Runs one pipeline stage (or `all`), writing artifacts and a manifest
// under config.output_dir. Throws ConfigError, DataError or
// NumericalError; anything else is a bug.
void run_stage(const ExperimentConfig& config, const std::string& command);

}  // namespace uct
