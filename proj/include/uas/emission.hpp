#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uas/simulation.hpp"

namespace uas {

inline constexpr std::string_view kTrajectoryHeader = "agent_id,timestamp,latitude,longitude";
inline constexpr std::string_view kStaypointHeader = "agent_id,arrival,departure,venue_type,site_id,latitude,longitude";
inline constexpr std::string_view kSocialLinkHeader = "agent_id,friend_id,timestamp";

inline constexpr const char* kTrajectoryFile = "trajectory.csv";
inline constexpr const char* kStaypointFile = "staypoints.csv";
inline constexpr const char* kSocialLinkFile = "social_links.csv";

struct TrajectoryRecord {
  AgentId agent_id = 0;
  Timestamp timestamp;
  LatLon position;
  bool operator==(const TrajectoryRecord&) const = default;
};

struct StaypointRecord {
  AgentId agent_id = 0;
  Timestamp arrival;
  Timestamp departure;
  SiteKind venue_type = SiteKind::Home;
  SiteId site_id = 0;
  LatLon position;
  bool operator==(const StaypointRecord&) const = default;
};

struct SocialLinkRecord {
  AgentId agent_id = 0;
  AgentId friend_id = 0;
  Timestamp timestamp;
  bool operator==(const SocialLinkRecord&) const = default;
};

struct LabelEntry {
  AgentId agent_id = 0;
  std::string label;
  Timestamp start;
  Timestamp end;
  bool operator==(const LabelEntry&) const = default;
};

struct SplitCounts {
  std::int64_t gps = 0;
  std::int64_t staypoints = 0;
  std::int64_t social_links = 0;
  bool operator==(const SplitCounts&) const = default;
};

struct ScenarioMeta {
  std::string name;
  int n_agents = 0;
  TimeWindow train;
  TimeWindow test;
  SplitCounts train_counts;
  SplitCounts test_counts;
  Mechanism mechanism = Mechanism::Central;
  std::string region;
  std::string anomaly_type;
  IntensityMix intensity_mix{};
  std::optional<double> transmission_prob;  // absent for central
  std::optional<std::string> selection;     // location only
  std::uint64_t seed = 0;
  std::optional<SiteId> source_site;
  std::optional<LatLon> source_location;
  std::vector<InfectionRecord> infection_log;
  bool operator==(const ScenarioMeta&) const = default;
};

/// One record per agent at `clock`, projected to WGS84.
std::vector<TrajectoryRecord> emit_tick(std::span<const AgentState> agents, Timestamp clock, const WorldMap& world);

/// Throws InternalError unless arrival < departure.
StaypointRecord close_staypoint(AgentId agent, const Site& site, Timestamp arrival, Timestamp departure,
                                const WorldMap& world);

/// Anomaly intervals clipped to the test window; normal agents omitted.
/// Sorted by agent id, then start.
std::vector<LabelEntry> build_labels(std::span<const ActiveAnomaly> anomalies, TimeWindow test);

std::string trajectory_row(const TrajectoryRecord& r);
std::string staypoint_row(const StaypointRecord& r);
std::string social_link_row(const SocialLinkRecord& r);

nlohmann::json build_info(const ScenarioMeta& meta);
ScenarioMeta parse_info(const nlohmann::json& j);
nlohmann::json labels_json(std::span<const LabelEntry> labels);
std::vector<LabelEntry> parse_labels(const nlohmann::json& j);

/// Writes `<scenario_dir>/{train.zip,test.zip,labels.json,info.json}` and
/// returns the metadata written to info.json.
ScenarioMeta split_and_write(const RunOutput& run, const WorldMap& world, const std::filesystem::path& scenario_dir);

/// A processed scenario directory, minus the trajectories (streamed on demand).
struct Bundle {
  std::filesystem::path dir;
  ScenarioMeta meta;
  std::vector<LabelEntry> labels;
  std::vector<StaypointRecord> train_staypoints;
  std::vector<StaypointRecord> test_staypoints;
  std::vector<SocialLinkRecord> train_links;
  std::vector<SocialLinkRecord> test_links;
};

/// Throws ProcessingError naming the offending file on schema mismatches.
Bundle load_bundle(const std::filesystem::path& scenario_dir);

void for_each_trajectory(const std::filesystem::path& zip_path,
                         const std::function<void(const TrajectoryRecord&)>& on_record);

}  // namespace uas
