#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "monoext/schema.hpp"

namespace monoext {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitStructural = 2, kExitInfeasible = 3 };

struct OutputFile {
  std::string suffix;  // appended to the scenario stem, e.g. ".result.json"
  std::string content;
};

struct ScenarioRun {
  int exit_code = kExitOk;
  nlohmann::json result;
  std::vector<OutputFile> files;  // result JSON first
};

struct RunOptions {
  bool svg = false;
  std::filesystem::path base_dir;  // for CSV paths inside the scenario
};

// Parses and validates; throws SchemaError (JSON-pointer path) or
// InvalidArgument for text that is not JSON.
nlohmann::json parse_scenario(std::string_view text);

// Solves a validated scenario and renders every output file in memory.
// Structural violations and infeasibility come back as exit codes 2 and 3 with
// a result JSON; any other failure throws and produces no files.
ScenarioRun run_scenario(const nlohmann::json& scenario, const RunOptions& opt = {});

}  // namespace monoext
