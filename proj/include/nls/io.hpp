#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nls/carleman.hpp"
#include "nls/fbi.hpp"
#include "nls/inverse.hpp"
#include "nls/linearization.hpp"

namespace nls {

// Plain comma separated table. Written as `# schema=<name> v1`, then one
// `# key=value` line per meta entry, then the header and the rows.
struct CsvTable {
  std::string file;     // relative to the output directory
  std::string schema;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string render() const;
};

// Shortest representation that reads back to the same double.
std::string fmt(double v);
std::string fmt(bool v);

// Writes through a temporary file in the same directory.
void write_text(const std::filesystem::path& path, const std::string& text);

CsvTable field_table(const ComplexField& f, const std::string& file = "field.csv");
CsvTable trajectory_table(const Trajectory& u, int stride = 1, const std::string& file = "trajectory.csv");
std::string certificate_text(const PicardCertificate& cert);
CsvTable convergence_table(const ConvergenceReport& r, const std::string& file = "convergence.csv");
CsvTable ratio_table(const SweepReport& r, CarlemanEstimate e, const std::string& file);
CsvTable kernel_table(const KernelBoundReport& r, const std::string& file = "kernel_bound.csv");
CsvTable stability_table(const StabilityReport& r, const std::string& file = "stability.csv");
CsvTable log_law_table(const PartialDataReport& r, const std::string& file = "log_law.csv");
CsvTable partial_delta_table(const PartialDataReport& r, const std::string& file = "partial_deltas.csv");

}  // namespace nls
