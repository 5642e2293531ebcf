#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "fraclap/surface.hpp"

namespace fraclap::cli {

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string command;  // subcommand
  std::string name;     // check name, or the subcommand again
  std::string theorem;  // statement the run exercises
  bool pass = true;
  std::vector<std::string> failures;  // names of the tolerances that failed
  nlohmann::json results = nlohmann::json::object();
  std::vector<Table> tables;

  // Records one tolerance test.
  void expect(bool ok, const std::string& what);
  nlohmann::json to_json() const;
};

/// Theorem tag of a check or subcommand.
std::string theorem_tag(const std::string& name);

/// Mesh and boundary datum described by the config.
struct Problem {
  MeshPtr mesh;
  Density datum;
};
Problem make_problem(const ExperimentConfig& config);

/// int over the sphere |y - c| = radius of Gamma_s(x - y) dS(y) at |x - c| = r.
double sphere_layer_potential(double s, double radius, double r);

Report run_check(const std::string& name, const ExperimentConfig& config);
Report run_convergence(const ExperimentConfig& config);
Report run_bvp(const ExperimentConfig& config);
Report run_mesh(const ExperimentConfig& config);
Report run_assemble(const ExperimentConfig& config);
Report run_solve(const ExperimentConfig& config);
Report run_field(const ExperimentConfig& config);

/// Writes `<dir>/<file stem>.json` and one CSV per table. Returns the JSON path.
std::filesystem::path write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace fraclap::cli
