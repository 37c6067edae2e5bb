// uas: configure, run, process and report simulated patterns-of-life datasets.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "uas/batch.hpp"
#include "uas/error.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::filesystem::path default_out_root() {
  if (const char* env = std::getenv("UAS_OUT_DIR"); env && *env) return env;
  return "uas_out";
}

int summarize(const std::vector<uas::ScenarioResult>& results, const char* verb) {
  int failed = 0;
  for (const auto& r : results) {
    if (r.ok) {
      std::cout << verb << " " << r.scenario << "\n";
    } else {
      ++failed;
      std::cerr << "FAILED " << r.scenario << ": " << r.error << "\n";
    }
  }
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " scenarios "
            << verb << "\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Urban patterns-of-life simulator with injected anomalies"};
  app.require_subcommand(1);
  std::filesystem::path out_root = default_out_root();
  app.add_option("--out", out_root, "Output root (default: $UAS_OUT_DIR or ./uas_out)");

  std::string mechanism;
  std::filesystem::path sweep;
  auto* configure = app.add_subcommand("configure", "Expand a parameter sweep into scenario configs and a manifest");
  configure->add_option("--mechanism", mechanism, "central | infectious | location")->required();
  configure->add_option("--sweep", sweep, "Sweep JSON file")->required();

  std::filesystem::path manifest;
  int cores = 1;
  auto* run = app.add_subcommand("run", "Run every scenario of a manifest");
  run->add_option("--manifest", manifest, "Manifest JSON written by configure")->required();
  run->add_option("--cores", cores, "Scenarios run concurrently")->default_val(1);

  std::filesystem::path dir;
  auto* process = app.add_subcommand("process", "Turn raw runs into dataset bundles");
  process->add_option("--dir", dir, "Output root holding raw/ (default: output root)");
  auto* report = app.add_subcommand("report", "Write analysis reports for processed bundles");
  report->add_option("--dir", dir, "Output root or one scenario directory (default: output root)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*configure) {
      const auto m = uas::parse_mechanism(mechanism);
      if (!m) throw uas::ConfigError("unknown mechanism '" + mechanism + "'");
      const auto path = uas::configure(*m, sweep, out_root);
      std::cout << path.string() << "\n";
      return kExitOk;
    }
    if (*run) return summarize(uas::run_manifest(manifest, cores, out_root), "ran");
    if (*process) return summarize(uas::process_all(dir.empty() ? out_root : dir), "processed");
    if (*report) return summarize(uas::report_all(dir.empty() ? out_root : dir), "reported");
  } catch (const uas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
