#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "uas/emission.hpp"

namespace uas {

enum class Period { Train, Test };

struct VisitCounts {
  AgentId agent_id = 0;
  int restaurant_visits = 0;
  int workplace_visits = 0;
  Period period = Period::Train;
  bool operator==(const VisitCounts&) const = default;
};

/// Restaurant and Workplace staypoints per agent whose arrival lies in `window`.
/// One entry for every agent id in [0, n_agents).
std::vector<VisitCounts> visit_counts(std::span<const StaypointRecord> staypoints, TimeWindow window, Period period,
                                      int n_agents);

inline constexpr double kJaccardBothEmpty = -0.1;

/// |A n B| / |A u B|, or -0.1 when both sets are empty.
double jaccard(const std::set<SiteId>& train_sites, const std::set<SiteId>& test_sites);

/// Recreation sites visited by each agent, indexed by agent id.
std::vector<std::set<SiteId>> recreation_sites(std::span<const StaypointRecord> staypoints, int n_agents);

inline constexpr double kEarthRadiusKm = 6378.137;

double haversine_km(LatLon a, LatLon b);

/// Great-circle path length per day over one agent's fixes in `window`.
/// Records must be time-ordered; any missing 5-minute fix is a DataIntegrityError.
double avg_daily_distance(std::span<const TrajectoryRecord> trajectory, TimeWindow window);

struct EpiCurvePoint {
  Timestamp timestamp;
  int n_susceptible = 0;
  int n_exposed = 0;
  int n_infectious = 0;
  int n_recovered = 0;
  bool operator==(const EpiCurvePoint&) const = default;
};

Compartment compartment_at(const InfectionRecord& r, Timestamp t);

/// Census at every midnight from range.start to range.end inclusive.
std::vector<EpiCurvePoint> epi_curve(std::span<const InfectionRecord> log, int population, TimeWindow range);

struct SeirSummary {
  int exposed = 0;     // ever exposed through contact or location (seeds excluded)
  int infectious = 0;  // ever infectious, seeds included
  int recovered = 0;
  bool operator==(const SeirSummary&) const = default;
};

/// Ever-counts of events at or before `cutoff`.
SeirSummary seir_summary(std::span<const InfectionRecord> log, Timestamp cutoff);

struct SpatialPoint {
  bool is_source = false;
  AgentId agent_id = -1;
  LatLon position;
  bool operator==(const SpatialPoint&) const = default;
};

/// Source site first, then the home of every labelled agent in id order.
/// `homes[agent]` is the agent's home coordinate.
std::vector<SpatialPoint> spatial_anomaly_map(std::span<const std::optional<LatLon>> homes,
                                              std::span<const LabelEntry> labels, LatLon source);

/// Home coordinates observed in Home staypoints, indexed by agent id.
std::vector<std::optional<LatLon>> observed_homes(const Bundle& bundle);

/// Writes the report files for one processed scenario into `report_dir`.
void write_report(const Bundle& bundle, const std::filesystem::path& report_dir);

}  // namespace uas
