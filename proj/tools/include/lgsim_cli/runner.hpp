#pragma once

#include <vector>

#include "json.hpp"
#include "lgsim_cli/config.hpp"
#include "lgsim_cli/output.hpp"

namespace lgsim::cli {

struct RunOutput {
  nlohmann::ordered_json summary;
  std::vector<OutputFile> files;  ///< empty when no output directory was configured
};

/// Runs one scenario entirely in memory. Nothing touches the filesystem.
RunOutput run(const RunConfig& cfg);

/// Parses argv, runs, writes files and prints the summary. Returns the exit code.
int main_entry(int argc, char** argv);

}  // namespace lgsim::cli
