#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lesionkit::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line (args excludes the program name) and returns the
/// process exit code. Data goes to files, logs to stderr.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

struct CaseFiles {
  std::string id;
  std::filesystem::path first;
  std::filesystem::path second;
};

struct CaseDiscovery {
  std::vector<CaseFiles> cases;        // ascending id, both files present
  std::vector<std::string> unpaired;   // "<id>: missing <file>" entries
};

/// Scans `<dir_a>/<id>/<name_a>.nii[.gz]` and `<dir_b>/<id>/<name_b>.nii[.gz]`.
CaseDiscovery discover_cases(const std::filesystem::path& dir_a, const std::string& name_a,
                             const std::filesystem::path& dir_b, const std::string& name_b);

}  // namespace lesionkit::cli
