// Runs the acceptance configs in configs/acceptance at their stated
// tolerances and prints one PASS/FAIL line per criterion. Reports go to
// argv[1] (default acceptance-out), one subdirectory per config.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"

namespace fs = std::filesystem;
using namespace fraclap::cli;

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance-out");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(FRACLAP_ACCEPTANCE_DIR))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  int failed = 0;
  for (const fs::path& file : files) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::vector<std::string> failures;
    try {
      ExperimentConfig c = load_config(file);
      c.output = out / file.stem();
      std::vector<Report> reports;
      if (c.checks.empty()) {
        reports.push_back(run_bvp(c));
      } else {
        for (const auto& name : c.checks) reports.push_back(run_check(name, c));
      }
      for (const Report& r : reports) {
        write_report(r, c.output);
        pass = pass && r.pass;
        failures.insert(failures.end(), r.failures.begin(), r.failures.end());
      }
    } catch (const std::exception& e) {
      pass = false;
      failures.push_back(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1f s)\n", pass ? "PASS" : "FAIL", file.stem().c_str(), secs);
    for (const auto& f : failures) std::printf("    failed: %s\n", f.c_str());
    std::fflush(stdout);
    if (!pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(files.size()) - failed, files.size());
  return failed == 0 ? 0 : 1;
}
