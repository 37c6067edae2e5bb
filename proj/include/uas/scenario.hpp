#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "uas/agents.hpp"
#include "uas/injection.hpp"
#include "uas/time.hpp"
#include "uas/worldmap.hpp"

namespace uas {

enum class Mechanism { Central, Infectious, Location };

std::string_view to_string(Mechanism m);  // "central" | "infectious" | "location"
std::optional<Mechanism> parse_mechanism(std::string_view text);

/// Which shared sites carry SEIR contact.
enum class SeirSites {
  AllShared,         // every site except homes
  PointsOfInterest,  // restaurants and recreation sites only
};

std::string_view to_string(SeirSites s);
std::optional<SeirSites> parse_seir_sites(std::string_view text);

/// "combined" or one of the four anomaly type names.
std::string type_mix_name(const TypeMix& mix);
std::optional<TypeMix> parse_type_mix(std::string_view text);

struct ScenarioConfig {
  std::string name = "scenario";
  Mechanism mechanism = Mechanism::Central;
  std::optional<std::string> map_path;  // overrides `synthetic` when set
  SyntheticMapSpec synthetic;
  int n_agents = 1000;
  std::uint64_t seed = 1;
  Timestamp epoch = kDefaultEpoch;
  int warmup_days = 28;
  int train_days = 28;
  int test_days = 28;
  TypeMix anomaly_type;
  IntensityMix intensity_mix{1.0, 1.0, 1.0};
  int n_central = 120;
  EpidemicConfig epidemic;
  LocationSourceConfig location;
  SeirSites seir_sites = SeirSites::AllShared;
  NeedsConfig needs;
  Schedule schedule;
  std::string out_dir;  // empty: the CLI's output root

  TimeWindow warmup_window() const;
  TimeWindow train_window() const;
  TimeWindow test_window() const;
  /// Region label used in directory names.
  std::string region() const;
  /// `<mechanism>/<region>_<name>`
  std::filesystem::path relative_dir() const;

  void validate() const;  // throws ConfigError
  bool operator==(const ScenarioConfig&) const = default;
};

/// Defaults with the mechanism's test length (28 days central, 84 otherwise).
ScenarioConfig default_config(Mechanism m);

nlohmann::json to_json(const ScenarioConfig& c);
/// Missing keys take the mechanism's defaults. Throws ConfigError.
ScenarioConfig config_from_json(const nlohmann::json& j);

std::string serialize_config(const ScenarioConfig& c);
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);
void save_config(const ScenarioConfig& c, const std::filesystem::path& path);

/// Map named by the config (file or synthetic).
WorldMap build_world(const ScenarioConfig& c);

}  // namespace uas
