#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "experiments.hpp"

using namespace fraclap::cli;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("Defaults") {
  const ExperimentConfig c = parse_config(json::object());
  CHECK(c.alpha == 0.75);
  CHECK(c.nlat == 32);
  CHECK(c.nlon == 64);
  CHECK(section(c, "funk-hecke")["lmax"] == 20);
  CHECK(section(c, "symmetry")["near_tol"] == 1e-3);
  CHECK(is_check("besov"));
  CHECK_FALSE(is_check("bvp"));

  const ExperimentConfig r = parse_config(json::parse(R"({"resolution": {"nlat": 12}, "rayleigh": {"lmax": 4}})"));
  CHECK(r.nlon == 24);
  CHECK(section(r, "rayleigh")["lmax"] == 4);
  CHECK(section(r, "rayleigh")["tol"] == 1e-3);
}

TEST_CASE("Schema violations") {
  const char* bad[] = {
      R"({"alpha": 1.2})",
      R"({"alpha": "0.7"})",
      R"({"colour": 1})",
      R"({"checks": ["nope"]})",
      R"({"resolution": {"nlat": 16, "nlon": 33}})",
      R"({"resolution": {"nlat": 4}})",
      R"({"surface": {"type": "torus"}})",
      R"({"surface": {"type": "ellipsoid", "axes": [1, 0, 1]}})",
      R"({"solver": {"method": "gmres"}})",
      R"({"datum": {"type": "harmonic", "l": 2, "m": 3}})",
      R"({"rayleigh": {"tol": -1}})",
      R"({"rayleigh": {"alphas": [0.4]}})",
      R"({"semigroup-flat": {"normalization": "other"}})",
      R"({"weak": {"grid_n": 12.5}})",
      R"({"seed": -3})",
  };
  for (const char* text : bad) {
    INFO(text);
    CHECK_THROWS_AS(parse_config(json::parse(text)), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("A passing check") {
  const ExperimentConfig c = parse_config(json::parse(R"({"funk-hecke": {"lmax": 6}})"));
  const Report r = run_check("funk-hecke", c);
  CHECK(r.pass);
  CHECK(r.failures.empty());
  CHECK(r.theorem == theorem_tag("funk-hecke"));
  CHECK(theorem_tag("weak") != theorem_tag("funk-hecke"));
}

TEST_CASE("Normalisation decides the flat semigroup check") {
  const ExperimentConfig lit = parse_config(json::parse(R"({"semigroup-flat": {"alphas": [0.75], "separations": [1.0]}})"));
  const ExperimentConfig norm = parse_config(
      json::parse(R"({"semigroup-flat": {"alphas": [0.75], "separations": [1.0], "normalization": "flat-constant"}})"));
  CHECK_FALSE(run_check("semigroup-flat", lit).pass);
  CHECK(run_check("semigroup-flat", norm).pass);
}

TEST_CASE("Reports are deterministic") {
  const ExperimentConfig c = parse_config(json::parse(R"({"resolution": {"nlat": 8}, "seed": 3, "datum": {"type": "random", "lmax": 3}})"));
  const auto dir = std::filesystem::temp_directory_path() / "fraclap_cli_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig ca = c, cb = c;
  ca.output = dir / "a";
  cb.output = dir / "b";
  const auto first = write_report(run_mesh(ca), ca.output);
  const auto second = write_report(run_mesh(cb), cb.output);
  CHECK(slurp(first) == slurp(second));
  CHECK(first.filename() == "mesh.json");
  CHECK(std::filesystem::exists(dir / "a" / "mesh.csv"));
  CHECK(slurp(dir / "a" / "mesh.csv") == slurp(dir / "b" / "mesh.csv"));
  const json j = json::parse(slurp(first));
  CHECK(j["command"] == "mesh");
  CHECK(j.contains("pass"));

  // The seed changes the random datum.
  ExperimentConfig other = c;
  other.seed = 4;
  other.output = dir / "c";
  run_mesh(other);
  CHECK(slurp(dir / "a" / "mesh.csv") != slurp(dir / "c" / "mesh.csv"));
  std::filesystem::remove_all(dir);
}
