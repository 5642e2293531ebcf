#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fraclap/assembly.hpp"
#include "fraclap/solve.hpp"
#include "fraclap/surface.hpp"

namespace fraclap::cli {

// Schema violations and other unusable configurations (exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  double alpha = 0.75;
  SurfaceDescriptor surface = SurfaceDescriptor::sphere(1.0);
  int nlat = 32;
  int nlon = 64;
  SolveOptions solver;
  CorrectionOptions correction;
  std::vector<std::string> checks;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
  // Boundary datum: {"type": "constant" | "harmonic" | "random" | "csv", ...}.
  nlohmann::json datum;
  // Parameter sections keyed by check or subcommand name, defaults merged in.
  nlohmann::json sections;
};

/// Names accepted by `check` and `convergence`, in a fixed order.
const std::vector<std::string>& check_names();
bool is_check(const std::string& name);

/// Default parameters and tolerances for a check or subcommand section.
nlohmann::json section_defaults(const std::string& name);

/// Validates a parsed config against the schema and fills in defaults.
ExperimentConfig parse_config(const nlohmann::json& document);

/// Reads and parses a JSON file; syntax errors become ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Section with defaults applied.
const nlohmann::json& section(const ExperimentConfig& config, const std::string& name);

}  // namespace fraclap::cli
