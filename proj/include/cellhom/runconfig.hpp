#pragma once

#include <cstdint>
#include <string>

#include "cellhom/error.hpp"

namespace cellhom {

// Everything the driver needs besides the configuration itself. Flags
// override config fields; `tasks` = 0 means available parallelism.
struct RunOptions {
  std::string config_path;  // exactly one of config_path / fixture
  std::string fixture;
  std::string out_dir = "out";
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  int tasks = 0;
  bool check = false;
};

// 1 = configuration / validation problem, 2 = runtime or solver failure.
int exit_code_for(ErrorCode code);

// Loads the configuration (file or built-in fixture), dispatches the command,
// and writes config.json, results.csv, summary.json, and manifest.txt into
// the output directory. Returns the process exit code: 0 success, 1 config
// error, 2 solver/runtime failure, 3 check failure when checks are requested.
int run_from_options(const RunOptions& opts);

}  // namespace cellhom
