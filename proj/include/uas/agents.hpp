#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "uas/anomalies.hpp"
#include "uas/rng.hpp"
#include "uas/time.hpp"
#include "uas/worldmap.hpp"

namespace uas {

/// Need dynamics shared by the whole population. Units are abstract "need
/// units"; rates are per minute.
struct NeedsConfig {
  double time_to_hunger_min = 480.0;
  double hunger_rate = 1.0;
  double hunger_critical = 100.0;
  double meal_duration_min = 30.0;
  double social_need_rate = 0.1;
  double social_critical = 100.0;
  double recreation_duration_min = 90.0;

  void validate() const;  // throws ConfigError
  bool operator==(const NeedsConfig&) const = default;
};

/// Daily routine. Minutes are minutes-of-day. Agents at home during
/// [sleep_time, wake_time) are asleep: hunger keeps accruing but they only
/// act on it once they wake.
struct Schedule {
  int work_start = 540;
  int work_end = 1020;
  int wake_time = 360;
  int sleep_time = 1320;
  std::array<bool, 7> workdays{true, true, true, true, true, false, false};  // Monday first

  bool is_workday(Timestamp t) const { return workdays[static_cast<std::size_t>(weekday(t))]; }
  bool in_work_hours(Timestamp t) const {
    const int m = minute_of_day(t);
    return is_workday(t) && m >= work_start && m < work_end;
  }
  bool is_sleep_time(Timestamp t) const {
    const int m = minute_of_day(t);
    return sleep_time > wake_time ? (m >= sleep_time || m < wake_time) : (m >= sleep_time && m < wake_time);
  }
  void validate() const;  // throws ConfigError
  bool operator==(const Schedule&) const = default;
};

inline constexpr double kWalkingSpeedMPerMin = 5000.0 / 60.0;
inline constexpr double kTickTravelM = kWalkingSpeedMPerMin * kTickMinutes;
inline constexpr std::size_t kFavoriteSitesCapacity = 5;
inline constexpr double kNearestRecreationProb = 0.8;

enum class Activity { AtHome, Working, Eating, Recreating, Traveling };

struct Travel {
  SiteId destination = 0;
  Activity purpose = Activity::AtHome;
  Route route;
  double travelled_m = 0.0;
  double remaining_m() const { return route.length() - travelled_m; }
};

struct AgentState {
  AgentId id = 0;
  SiteId home = 0;
  SiteId workplace = 0;
  BehaviorParams params;                      // effective parameters
  std::optional<BehaviorParams> saved_params;  // pre-anomaly parameters while one is active

  double hunger_level = 0.0;
  double social_level = 0.0;
  double minutes_since_meal = 0.0;

  Activity activity = Activity::AtHome;
  SiteId site = 0;            // current site; meaningless while travelling
  Timestamp stay_arrival;     // arrival at `site`
  Timestamp activity_end;     // completion of Eating / Recreating
  std::optional<Travel> travel;
  Point position;

  std::set<AgentId> friends;
  std::deque<SiteId> favorite_sites;  // most recent last

  std::int64_t work_decision_day = std::numeric_limits<std::int64_t>::min();
  bool skipping_work_today = false;

  int interest_group() const { return params.interest_group; }
  bool traveling() const { return travel.has_value(); }
};

struct StayRecord {
  AgentId agent_id = 0;
  SiteId site_id = 0;
  SiteKind kind = SiteKind::Home;
  Timestamp arrival;
  Timestamp departure;
  bool operator==(const StayRecord&) const = default;
};

struct SocialLink {
  AgentId agent_id = 0;  // lower id of the pair
  AgentId friend_id = 0;
  Timestamp time;
  bool operator==(const SocialLink&) const = default;
};

/// Outcome of a planned departure to work.
struct WorkDecision {
  AgentId agent_id = 0;
  Timestamp at;
  double skip_prob = 0.0;
  bool skipped = false;
};

struct TickContext {
  const WorldMap& world;
  const NeedsConfig& needs;
  const Schedule& schedule;
  Timestamp now;
};

struct TickEvents {
  std::optional<StayRecord> closed_stay;  // only stays of at least one tick
  std::optional<WorkDecision> work_decision;
};

/// Homes and workplaces uniform with replacement, interest group uniform,
/// appetite_time_factor uniform in [0.8, 1.2]. Everyone starts at home at `start`.
std::vector<AgentState> initialize_population(const WorldMap& world, int n_agents, const NeedsConfig& needs,
                                              Timestamp start, Rng& rng);
std::vector<AgentState> initialize_population(const WorldMap& world, int n_agents, const NeedsConfig& needs,
                                              Timestamp start, std::uint64_t seed);

/// Advance needs by `dt` minutes. Hunger accrues only for the part of the
/// interval past the onset time; social need accrues while awake and not recreating.
void update_needs(AgentState& agent, const NeedsConfig& needs, double dt, bool awake = true);

/// One 5-minute step starting at ctx.now. Decision priority at a site:
/// hunger, work hours, social need, home. Travelling agents only move.
TickEvents tick(AgentState& agent, const TickContext& ctx, Rng& rng);

/// Recreation destination from the agent's current site. Appends the choice
/// to the favourites (LRU, capacity 5).
SiteId choose_recreation(AgentState& agent, const WorldMap& world, Rng& rng);

/// Befriends every co-present pair that are not yet friends; one link per new pair.
std::vector<SocialLink> colocation_update(std::span<AgentState* const> agents_at_site, SiteId site, Timestamp clock);

/// One Bernoulli draw per planned departure.
bool draw_work_skip(const BehaviorParams& params, Rng& rng);

/// Replace the effective parameters with the profile applied to the agent's
/// current (pre-anomaly) parameters.
void activate_profile(AgentState& agent, const AnomalyProfile& profile);

/// Restore the exact pre-anomaly parameter vector. No-op if nothing is active.
void deactivate(AgentState& agent);

}  // namespace uas
