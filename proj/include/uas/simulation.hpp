#pragma once

#include <filesystem>
#include <map>
#include <unordered_map>
#include <memory>
#include <optional>
#include <vector>

#include "uas/agents.hpp"
#include "uas/anomalies.hpp"
#include "uas/injection.hpp"
#include "uas/scenario.hpp"
#include "uas/worldmap.hpp"

namespace uas {

/// Agent position at an emitted tick. Only changes are stored, except for the
/// first emitted tick, which lists every agent.
struct PositionSample {
  std::int32_t tick = 0;  // ticks since train start
  AgentId agent_id = 0;
  Point position;
  bool operator==(const PositionSample&) const = default;
};

struct RunStats {
  std::vector<WorkDecision> work_decisions;  // test window only
  std::vector<Census> census;                // one per test tick (epidemic mechanisms)
};

struct RunOutput {
  ScenarioConfig config;
  std::vector<SiteId> homes;              // by agent id
  std::vector<PositionSample> positions;  // tick-major, then agent id
  std::vector<StayRecord> stays;          // arrival inside train or test, closed at the end of the run
  std::vector<SocialLink> links;          // every formation including warm-up, chronological
  std::vector<ActiveAnomaly> anomalies;   // unclipped intervals
  std::vector<InfectionRecord> infections;
  std::optional<SiteId> source_site;
  RunStats stats;
};

/// Tick engine for one scenario. Each 5-minute tick t:
///   record positions at t; advance the epidemic and anomaly schedule;
///   tick agents in id order; then resolve co-presence during [t, t+5)
///   (friendships at recreation sites, SEIR contacts, source-site visits).
class Simulation {
 public:
  Simulation(ScenarioConfig config, const WorldMap& world);
  ~Simulation();

  Timestamp now() const { return now_; }
  bool done() const { return now_ >= end_; }
  void step();
  void run_to_end();
  const std::vector<AgentState>& agents() const { return agents_; }
  const Epidemic* epidemic() const { return epidemic_.get(); }
  /// Closes open stays and hands over the record streams.
  RunOutput finish();

 private:
  void start_test_phase();
  void activate(const ActiveAnomaly& anomaly);
  void record_positions();
  void handle_transitions(const std::vector<Transition>& transitions);
  void resolve_copresence();

  ScenarioConfig config_;
  const WorldMap& world_;
  TimeWindow train_;
  TimeWindow test_;
  Timestamp now_;
  Timestamp end_;
  Rng behavior_rng_;
  Rng injection_rng_;
  std::vector<AgentState> agents_;
  std::unique_ptr<Epidemic> epidemic_;
  std::optional<LocationSource> source_;
  std::map<AgentId, Timestamp> interest_active_;  // agent -> activation time
  std::vector<std::optional<Point>> last_emitted_;
  std::vector<std::vector<AgentState*>> occupants_;  // by site index
  std::unordered_map<SiteId, std::size_t> site_slot_;  // site id -> index into world sites
  RunOutput out_;
};

RunOutput run_simulation(const ScenarioConfig& config, const WorldMap& world);

/// Raw run directory: config.json, map.json, positions.csv, stays.csv,
/// links.csv, injection.json.
void write_raw(const RunOutput& run, const WorldMap& world, const std::filesystem::path& dir);

struct RawRun {
  RunOutput output;
  std::unique_ptr<WorldMap> world;
};

/// Throws ProcessingError naming the missing or malformed file.
RawRun read_raw(const std::filesystem::path& dir);

}  // namespace uas
