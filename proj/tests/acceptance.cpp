// Runs the twelve acceptance checks and prints one PASS/FAIL line per check.
// Exits 0 once every line is printed; with --strict, exits 1 if any check failed.

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "svcloc/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  bool strict = false, quiet = false;
  std::string report;
  svcloc::verify::VerifyOptions options;
  app.add_option("--only", only, "run only these check ids")->check(CLI::Range(1, 12));
  app.add_flag("--strict", strict, "exit 1 when a check fails");
  app.add_flag("--quiet", quiet, "no progress messages on stderr");
  app.add_option("--seed", options.seed, "master seed");
  app.add_option("--threads", options.threads, "worker threads (0 = all cores)");
  app.add_option("--report", report, "also write the result lines to this file");
  CLI11_PARSE(app, argc, argv);

  if (!quiet) options.progress = [](const std::string& m) { std::cerr << "  " << m << std::endl; };
  const std::set<int> chosen(only.begin(), only.end());
  std::ofstream file;
  if (!report.empty()) {
    file.open(report);
    if (!file) {
      std::cerr << "cannot write " << report << std::endl;
      return 2;
    }
  }
  bool all = true;
  for (const auto& [id, name] : svcloc::verify::catalog()) {
    if (!chosen.empty() && !chosen.count(id)) continue;
    if (!quiet) std::cerr << "running " << id << " (" << name << ")" << std::endl;
    const auto r = svcloc::verify::run_check(id, options);
    all = all && r.passed;
    std::ostringstream line;
    line << "criterion " << id << " [" << r.name << "]: " << (r.passed ? "PASS" : "FAIL") << " (" << r.detail << "; "
         << static_cast<int>(r.seconds + 0.5) << " s)";
    std::cout << line.str() << std::endl;
    if (file) file << line.str() << std::endl;
  }
  return strict && !all ? 1 : 0;
}
