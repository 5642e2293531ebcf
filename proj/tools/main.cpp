// fraclap: command-line driver for meshes, operators, solves and checks.
//
//   fraclap <subcommand> [--config file.json] [--out dir] [--seed n] [--quiet]
//
// Exit status: 0 when every tolerance passes, 1 when a tolerance fails or a
// computation raises an error, 2 for invalid configurations or arguments.
// FRACLAP_THREADS caps the number of threads used by Eigen.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"

#include "config.hpp"
#include "experiments.hpp"
#include "fraclap/errors.hpp"

namespace {

using namespace fraclap::cli;

struct Options {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::string check;
};

void apply_threads() {
  const char* env = std::getenv("FRACLAP_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("FRACLAP_THREADS must be a positive integer");
  Eigen::setNbThreads(static_cast<int>(n));
}

ExperimentConfig configure(const Options& o) {
  ExperimentConfig c = o.config_path.empty() ? parse_config(nlohmann::json::object()) : load_config(o.config_path);
  if (o.out) c.output = *o.out;
  if (o.seed) c.seed = *o.seed;
  return c;
}

int finish(const Report& r, const ExperimentConfig& c, const Options& o, double seconds) {
  const auto path = write_report(r, c.output);
  if (!o.quiet) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.command << (r.command == r.name ? "" : " " + r.name)
              << " (theorem " << r.theorem << ", " << seconds << " s) -> " << path.string() << "\n";
    for (const auto& f : r.failures) std::cout << "  failed: " << f << "\n";
  }
  return r.pass ? 0 : 1;
}

int run(const std::string& command, const Options& o) {
  apply_threads();
  const ExperimentConfig c = configure(o);
  std::vector<std::string> checks;
  if (command == "check") {
    if (!o.check.empty()) {
      if (!is_check(o.check)) throw ConfigError("unknown check '" + o.check + "'");
      checks.push_back(o.check);
    } else {
      checks = c.checks;
    }
    if (checks.empty()) throw ConfigError("no check named on the command line or in the config");
  }

  int status = 0;
  auto timed = [&](auto&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    const Report r = body();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    status = std::max(status, finish(r, c, o, dt));
  };
  if (command == "check") {
    for (const auto& name : checks) timed([&] { return run_check(name, c); });
  } else if (command == "convergence") {
    timed([&] { return run_convergence(c); });
  } else if (command == "bvp") {
    timed([&] { return run_bvp(c); });
  } else if (command == "mesh") {
    timed([&] { return run_mesh(c); });
  } else if (command == "assemble") {
    timed([&] { return run_assemble(c); });
  } else if (command == "solve") {
    timed([&] { return run_solve(c); });
  } else if (command == "field") {
    timed([&] { return run_field(c); });
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-integral solver for the fractional Laplacian"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides the config)");
    sub->add_option("--seed", o.seed, "seed for random data (overrides the config)");
    sub->add_flag("--quiet", o.quiet, "no console summary");
  };
  common(app.add_subcommand("mesh", "write the quadrature mesh as CSV"));
  common(app.add_subcommand("assemble", "assemble the operator and report its conditioning"));
  common(app.add_subcommand("solve", "solve for the density of a boundary datum"));
  common(app.add_subcommand("field", "evaluate the potential at configured points"));
  CLI::App* check = app.add_subcommand("check", "run a named check, or those listed in the config");
  common(check);
  check->add_option("name", o.check, "check name");
  common(app.add_subcommand("convergence", "run a check over several resolutions"));
  common(app.add_subcommand("bvp", "datum to density to field to decay fit"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fraclap::Error& e) {
    std::cerr << "error in " << command << (o.check.empty() ? "" : " " + o.check) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
