#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uas/scenario.hpp"

namespace uas {

/// Sweep file:
///   {"base": {...partial scenario config...},
///    "transmission_probs": [...], "anomaly_types": [...],
///    "selections": [...], "seeds": [...]}
/// central needs anomaly_types; infectious adds transmission_probs;
/// location adds selections. seeds defaults to the base seed.
struct SweepSpec {
  nlohmann::json base = nlohmann::json::object();
  std::vector<double> transmission_probs;
  std::vector<std::string> anomaly_types;
  std::vector<std::string> selections;
  std::vector<std::uint64_t> seeds;
};

SweepSpec parse_sweep(const nlohmann::json& j);
/// Cartesian product in the order selection, prob, type, seed. Throws
/// ConfigError naming the first invalid or empty axis.
std::vector<ScenarioConfig> expand_sweep(Mechanism mechanism, const SweepSpec& sweep);

/// Writes one config per combination to `<out>/configs/<mechanism>/` and a
/// manifest `<out>/configs/<mechanism>_manifest.json`. Returns the manifest path.
std::filesystem::path configure(Mechanism mechanism, const std::filesystem::path& sweep_file,
                                const std::filesystem::path& out_root);

struct Manifest {
  std::vector<std::filesystem::path> configs;  // absolute or relative to the manifest
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

struct ScenarioResult {
  std::string scenario;  // relative scenario directory
  bool ok = false;
  std::string error;
};

/// Runs every scenario with at most `cores` at once. Raw runs land in
/// `<out>/raw/<mechanism>/<region>_<name>/`; a failing scenario's partial
/// output is moved to `<out>/_failed/...` with an error.txt.
std::vector<ScenarioResult> run_manifest(const std::filesystem::path& manifest_path, int cores,
                                         const std::filesystem::path& out_root);

/// Raw run directory -> dataset bundle, for every raw run under `<out>/raw`.
std::vector<ScenarioResult> process_all(const std::filesystem::path& out_root);

/// Bundles under `<root>` -> `<root>/report/<mechanism>/<scenario>/` plus
/// `<root>/report/summary.csv`.
std::vector<ScenarioResult> report_all(const std::filesystem::path& root);

/// Scenario directories (holding info.json) under `root`, sorted; skips the
/// raw, report and _failed trees.
std::vector<std::filesystem::path> find_bundles(const std::filesystem::path& root);

}  // namespace uas
