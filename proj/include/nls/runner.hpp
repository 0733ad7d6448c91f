#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "nls/io.hpp"
#include "nls/manifest.hpp"

namespace nls {

inline constexpr const char* kVersion = "0.1.0";

// Everything a run produces. Constants and checks keep insertion order.
struct Report {
  std::string operation;
  std::string manifest;  // canonical single-line manifest
  std::vector<std::pair<std::string, std::string>> constants;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<CsvTable> tables;
  std::vector<std::pair<std::string, std::string>> texts;  // file, content
  std::vector<std::string> warnings;
  bool failed = false;  // runtime failure
  std::string failure;

  bool pass() const;
  void constant(const std::string& key, double v);
  void constant(const std::string& key, const std::string& v);
  void check(const std::string& name, bool ok) { checks.push_back({name, ok}); }
};

enum class ReportFormat { csv, summary };

// Run log: the only output carrying timestamps and wall times.
class RunLog {
 public:
  explicit RunLog(std::filesystem::path path);
  void line(const std::string& msg);
  void stage(const std::string& name, double seconds);

 private:
  std::filesystem::path path_;
  std::string text_;
  void flush();
};

// csv: every table and text file not yet on disk; summary: summary.txt.
// Empty tables are written header-only and noted in the log.
void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& dir, RunLog* log = nullptr);

std::string summary_text(const Report& report);

struct RunOptions {
  std::filesystem::path out;  // overrides experiment.output when set
  int threads = 0;            // 0 keeps the current setting
};

struct RunResult {
  int exit_code = 0;  // 0 success, 2 validation, 3 runtime
  std::filesystem::path out;
  Report report;
  std::string message;
};

// Validates, runs `subcommand` (must match experiment.operation) and writes
// the artifacts. Runtime failures keep partial outputs and leave a FAILED file.
RunResult run_manifest(const std::filesystem::path& manifest, const std::string& subcommand,
                       const RunOptions& opt = {});

// Runs an already parsed manifest into `dir`.
Report execute(const Manifest& m, const std::filesystem::path& dir, RunLog* log = nullptr);

}  // namespace nls
