#pragma once

// Orchestration: runs the simulation and the requested checks for one
// config and writes every artifact under one output directory.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace cfrelax::cli {

enum class Command { Run, Study, Validate };

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct Verdict {
  std::string check;
  std::string parameters;
  double value = 0.0;
  double budget = 0.0;
  bool pass = false;
};

struct ExecuteOptions {
  Command command = Command::Run;
  /// Overrides cfg.output_dir when nonempty.
  std::filesystem::path output_dir;
  std::ostream* log = nullptr;  ///< progress lines; null for quiet
};

struct ExecuteResult {
  int exit_code = kExitError;
  std::vector<Verdict> verdicts;
  std::vector<std::string> outputs;  ///< relative paths, sorted
  std::string error;
};

/// Writes report.csv, snap_t<i>.csv, verdicts.csv, study_<name>.csv (with
/// per-run subdirectories) and manifest.json. Errors are caught and recorded
/// in the manifest; the exit code is 0 when all checks pass, 2 when any
/// fails, 1 on error.
ExecuteResult execute(const RunConfig& cfg, const ExecuteOptions& options = {});

/// Hex SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_sha1(std::string_view content);

}  // namespace cfrelax::cli
