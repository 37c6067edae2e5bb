#include "uas/batch.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "uas/analysis.hpp"
#include "uas/emission.hpp"
#include "uas/error.hpp"
#include "uas/simulation.hpp"
#include "uas/textio.hpp"

namespace uas {

namespace fs = std::filesystem;
using nlohmann::json;

SweepSpec parse_sweep(const json& j) {
  if (!j.is_object()) throw ConfigError("sweep file must be a JSON object");
  SweepSpec s;
  try {
    if (j.contains("base")) {
      if (!j["base"].is_object()) throw ConfigError("sweep 'base' must be an object");
      s.base = j["base"];
    }
    if (j.contains("transmission_probs")) s.transmission_probs = j["transmission_probs"].get<std::vector<double>>();
    if (j.contains("anomaly_types")) s.anomaly_types = j["anomaly_types"].get<std::vector<std::string>>();
    if (j.contains("selections")) s.selections = j["selections"].get<std::vector<std::string>>();
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep file: ") + e.what());
  }
  return s;
}

namespace {

void require_axis(bool empty, const char* axis, Mechanism m) {
  if (empty) throw ConfigError("sweep axis '" + std::string(axis) + "' is empty or missing for mechanism " +
                               std::string(to_string(m)));
}

}  // namespace

std::vector<ScenarioConfig> expand_sweep(Mechanism mechanism, const SweepSpec& sweep) {
  require_axis(sweep.anomaly_types.empty(), "anomaly_types", mechanism);
  for (std::size_t i = 0; i < sweep.anomaly_types.size(); ++i) {
    if (!parse_type_mix(sweep.anomaly_types[i])) {
      throw ConfigError("anomaly_types[" + std::to_string(i) + "] = '" + sweep.anomaly_types[i] +
                        "' is not one of hunger, work, social, interest, combined");
    }
  }
  std::vector<double> probs{-1.0};
  std::vector<std::string> selections{""};
  if (mechanism != Mechanism::Central) {
    require_axis(sweep.transmission_probs.empty(), "transmission_probs", mechanism);
    for (std::size_t i = 0; i < sweep.transmission_probs.size(); ++i) {
      const double p = sweep.transmission_probs[i];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("transmission_probs[" + std::to_string(i) + "] = " + format_shortest(p) +
                          " is outside [0, 1]");
      }
    }
    probs = sweep.transmission_probs;
  }
  if (mechanism == Mechanism::Location) {
    require_axis(sweep.selections.empty(), "selections", mechanism);
    for (std::size_t i = 0; i < sweep.selections.size(); ++i) {
      if (!parse_source_selection(sweep.selections[i])) {
        throw ConfigError("selections[" + std::to_string(i) + "] = '" + sweep.selections[i] +
                          "' is not one of random, popular");
      }
    }
    selections = sweep.selections;
  }

  json base = sweep.base;
  base["mechanism"] = to_string(mechanism);
  const ScenarioConfig templ = config_from_json(base);
  std::vector<std::uint64_t> seeds = sweep.seeds;
  if (seeds.empty()) seeds.push_back(templ.seed);

  std::vector<ScenarioConfig> out;
  for (const auto& sel : selections) {
    for (double p : probs) {
      for (const auto& type : sweep.anomaly_types) {
        for (std::uint64_t seed : seeds) {
          ScenarioConfig c = templ;
          c.anomaly_type = *parse_type_mix(type);
          c.seed = seed;
          std::string name;
          if (!sel.empty()) {
            c.location.selection = *parse_source_selection(sel);
            name += sel + "_";
          }
          if (p >= 0.0) {
            if (mechanism == Mechanism::Infectious) c.epidemic.transmission_prob = p;
            if (mechanism == Mechanism::Location) c.location.transmission_prob = p;
            name += "p" + format_shortest(p) + "_";
          }
          name += type;
          if (seeds.size() > 1) name += "_s" + std::to_string(seed);
          c.name = name;
          c.validate();
          out.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

fs::path configure(Mechanism mechanism, const fs::path& sweep_file, const fs::path& out_root) {
  json j;
  try {
    j = json::parse(read_file(sweep_file));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  } catch (const json::parse_error& e) {
    throw ConfigError(sweep_file.string() + ": " + e.what());
  }
  const auto configs = expand_sweep(mechanism, parse_sweep(j));
  const fs::path dir = out_root / "configs" / std::string(to_string(mechanism));
  fs::create_directories(dir);
  Manifest m;
  for (const auto& c : configs) {
    const fs::path rel = fs::path(std::string(to_string(mechanism))) / (c.name + ".json");
    save_config(c, out_root / "configs" / rel);
    m.configs.push_back(rel);
  }
  const fs::path manifest = out_root / "configs" / (std::string(to_string(mechanism)) + "_manifest.json");
  save_manifest(m, manifest);
  return manifest;
}

Manifest load_manifest(const fs::path& path) {
  Manifest m;
  try {
    const json j = json::parse(read_file(path));
    for (const auto& c : j.at("configs")) {
      fs::path p = c.get<std::string>();
      m.configs.push_back(p.is_absolute() ? p : path.parent_path() / p);
    }
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (m.configs.empty()) throw ConfigError(path.string() + ": manifest lists no scenarios");
  return m;
}

void save_manifest(const Manifest& m, const fs::path& path) {
  json j;
  j["configs"] = json::array();
  for (const auto& c : m.configs) j["configs"].push_back(c.generic_string());
  write_file(path, j.dump(1) + "\n");
}

namespace {

void quarantine(const fs::path& out_root, const fs::path& rel, const fs::path& partial, const std::string& error) {
  const fs::path dest = out_root / "_failed" / rel;
  std::error_code ec;
  fs::remove_all(dest, ec);
  fs::create_directories(dest.parent_path());
  if (fs::exists(partial)) {
    fs::rename(partial, dest, ec);
    if (ec) fs::remove_all(partial, ec);
  }
  fs::create_directories(dest);
  write_file(dest / "error.txt", error + "\n");
}

template <typename Fn>
std::vector<ScenarioResult> parallel_for(std::size_t n, int cores, Fn&& fn) {
  std::vector<ScenarioResult> results(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = fn(i);
  };
  const auto threads = static_cast<std::size_t>(std::max(1, std::min<int>(cores, static_cast<int>(n))));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace

std::vector<ScenarioResult> run_manifest(const fs::path& manifest_path, int cores, const fs::path& out_root) {
  if (cores < 1) throw ConfigError("--cores must be >= 1");
  const Manifest m = load_manifest(manifest_path);
  std::vector<ScenarioConfig> configs;
  for (const auto& p : m.configs) configs.push_back(load_config(p));
  {
    std::vector<fs::path> dirs;
    for (const auto& c : configs) dirs.push_back(c.relative_dir());
    std::sort(dirs.begin(), dirs.end());
    if (auto dup = std::adjacent_find(dirs.begin(), dirs.end()); dup != dirs.end()) {
      throw ConfigError("manifest has two scenarios writing to " + dup->string());
    }
  }
  return parallel_for(configs.size(), cores, [&](std::size_t i) {
    const ScenarioConfig& c = configs[i];
    const fs::path root = c.out_dir.empty() ? out_root : fs::path(c.out_dir);
    const fs::path rel = c.relative_dir();
    const fs::path dir = root / "raw" / rel;
    ScenarioResult r{rel.generic_string(), false, ""};
    try {
      std::error_code ec;
      fs::remove_all(dir, ec);
      fs::remove_all(root / "_failed" / rel, ec);
      const WorldMap world = build_world(c);
      const RunOutput run = run_simulation(c, world);
      write_raw(run, world, dir);
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
      try {
        quarantine(root, rel, dir, r.error);
      } catch (const std::exception& q) {
        r.error += std::string(" (quarantine failed: ") + q.what() + ")";
      }
    }
    return r;
  });
}

std::vector<ScenarioResult> process_all(const fs::path& out_root) {
  const fs::path raw_root = out_root / "raw";
  if (!fs::is_directory(raw_root)) throw ProcessingError("no raw runs under " + out_root.string());
  std::vector<fs::path> runs;
  for (const auto& e : fs::recursive_directory_iterator(raw_root)) {
    if (e.is_directory() && fs::exists(e.path() / "config.json")) runs.push_back(e.path());
  }
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) throw ProcessingError("no raw runs under " + raw_root.string());
  std::vector<ScenarioResult> results;
  for (const auto& dir : runs) {
    const fs::path rel = fs::relative(dir, raw_root);
    ScenarioResult r{rel.generic_string(), false, ""};
    try {
      const RawRun raw = read_raw(dir);
      split_and_write(raw.output, *raw.world, out_root / rel);
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::vector<fs::path> find_bundles(const fs::path& root) {
  std::vector<fs::path> out;
  if (fs::exists(root / "info.json")) {
    out.push_back(root);
    return out;
  }
  if (!fs::is_directory(root)) return out;
  for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_directory()) continue;
    const auto name = it->path().filename().string();
    if (it.depth() == 0 && (name == "raw" || name == "report" || name == "_failed" || name == "configs")) {
      it.disable_recursion_pending();
      continue;
    }
    if (fs::exists(it->path() / "info.json")) {
      out.push_back(it->path());
      it.disable_recursion_pending();
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ScenarioResult> report_all(const fs::path& root) {
  const auto bundles = find_bundles(root);
  if (bundles.empty()) throw ProcessingError("no processed scenarios under " + root.string());
  const bool single = bundles.size() == 1 && bundles.front() == root;
  const fs::path report_root = single ? root.parent_path().parent_path() / "report" : root / "report";
  std::vector<ScenarioResult> results;
  std::string summary =
      "mechanism,scenario,region,n_agents,anomaly_type,transmission_prob,train_gps,train_staypoints,"
      "train_social_links,test_gps,test_staypoints,test_social_links,labels\n";
  for (const auto& dir : bundles) {
    const fs::path rel = single ? fs::path(dir.parent_path().filename()) / dir.filename() : fs::relative(dir, root);
    ScenarioResult r{rel.generic_string(), false, ""};
    try {
      const Bundle b = load_bundle(dir);
      write_report(b, report_root / rel);
      const auto& m = b.meta;
      summary += std::string(to_string(m.mechanism)) + ',' + m.name + ',' + m.region + ',' +
                 std::to_string(m.n_agents) + ',' + m.anomaly_type + ',' +
                 (m.transmission_prob ? format_shortest(*m.transmission_prob) : "") + ',' +
                 std::to_string(m.train_counts.gps) + ',' + std::to_string(m.train_counts.staypoints) + ',' +
                 std::to_string(m.train_counts.social_links) + ',' + std::to_string(m.test_counts.gps) + ',' +
                 std::to_string(m.test_counts.staypoints) + ',' + std::to_string(m.test_counts.social_links) + ',' +
                 std::to_string(b.labels.size()) + '\n';
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  fs::create_directories(report_root);
  write_file(report_root / "summary.csv", summary);
  return results;
}

}  // namespace uas
