#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nls/forward.hpp"

namespace nls {

// Validation failure listing every offending key.
class ManifestError : public ConfigError {
 public:
  explicit ManifestError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct DomainBlock {
  int dim = 1;
  std::array<double, 2> extent{1.0, 0.0};
  std::array<int, 2> points{31, 0};
  double collar = 0.1;
};

// One generator call, e.g. {"generator": "sine_mode", "m": 2, "amplitude": 0.5}.
// A profile is the sum of its terms; an empty profile is zero.
using Profile = std::vector<nlohmann::json>;

struct SolverBlock {
  double T = 1.0;
  double dt = 0.01;
  std::string quadrature = "trapezoid";
  double picard_tol = 1e-13;
  int picard_max_iter = 60;
};

struct ExperimentBlock {
  std::string operation;   // one of the CLI subcommands
  std::string output;      // default "out/<operation>"
  nlohmann::json params;   // operation parameters with defaults filled in
};

struct Manifest {
  DomainBlock domain;
  Profile p, q, f;
  nlohmann::json nonlinearity;  // inline spec or {"file": path}
  SolverBlock solver;
  ExperimentBlock experiment;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;  // for relative nonlinearity files, not serialized
};

const std::vector<std::string>& operations();
const std::vector<std::string>& generator_names();

Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir = {});
Manifest load_manifest(const std::filesystem::path& path);
// Canonical form: sorted keys, defaults filled in, two-space indent.
std::string serialize(const Manifest& m);
// Same content on one line.
std::string serialize_compact(const Manifest& m);

// Objects built from a validated manifest.
struct Problem {
  GridPtr grid;
  PotentialField p, q;
  ComplexField f;
  NonlinearitySpec spec{2, {{1, 1, 1.0}}};
  SolveConfig cfg;
};

rvec evaluate_profile(const Grid& g, const Profile& profile, std::uint64_t seed);
NonlinearitySpec load_nonlinearity(const Manifest& m);
Problem build_problem(const Manifest& m);

}  // namespace nls
