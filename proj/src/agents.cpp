#include "uas/agents.hpp"

#include <algorithm>
#include <cmath>

#include "uas/error.hpp"

namespace uas {

void NeedsConfig::validate() const {
  const double values[] = {time_to_hunger_min, hunger_rate,     hunger_critical,        meal_duration_min,
                           social_need_rate,   social_critical, recreation_duration_min};
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("needs: all rates, durations and thresholds must be > 0");
  }
}

void Schedule::validate() const {
  const auto in_day = [](int m) { return m >= 0 && m < kMinutesPerDay; };
  if (!in_day(work_start) || !in_day(work_end) || work_start >= work_end) {
    throw ConfigError("schedule: need 0 <= work_start < work_end < 1440");
  }
  if (!in_day(wake_time) || !in_day(sleep_time) || wake_time == sleep_time) {
    throw ConfigError("schedule: wake_time and sleep_time must be distinct minutes of day");
  }
  if (work_start % kTickMinutes != 0 || work_end % kTickMinutes != 0 || wake_time % kTickMinutes != 0 ||
      sleep_time % kTickMinutes != 0) {
    throw ConfigError("schedule: times must be multiples of 5 minutes");
  }
}

std::vector<AgentState> initialize_population(const WorldMap& world, int n_agents, const NeedsConfig& needs,
                                              Timestamp start, Rng& rng) {
  if (n_agents < 1) throw ConfigError("n_agents must be >= 1");
  const auto& homes = world.sites_of_kind(SiteKind::Home);
  const auto& works = world.sites_of_kind(SiteKind::Workplace);
  const int groups = std::max(1, world.interest_group_count());
  std::vector<AgentState> agents(static_cast<std::size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    AgentState& a = agents[static_cast<std::size_t>(i)];
    a.id = i;
    a.home = homes[rng.index(homes.size())];
    a.workplace = works[rng.index(works.size())];
    a.params.interest_group = static_cast<int>(rng.index(static_cast<std::size_t>(groups)));
    a.params.appetite_time_factor = rng.uniform(0.8, 1.2);
    a.social_level = rng.uniform(0.0, needs.social_critical);
    a.site = a.home;
    a.stay_arrival = start;
    a.position = world.site(a.home).position;
  }
  return agents;
}

std::vector<AgentState> initialize_population(const WorldMap& world, int n_agents, const NeedsConfig& needs,
                                              Timestamp start, std::uint64_t seed) {
  Rng rng(seed);
  return initialize_population(world, n_agents, needs, start, rng);
}

void update_needs(AgentState& agent, const NeedsConfig& needs, double dt, bool awake) {
  const double onset = needs.time_to_hunger_min * agent.params.appetite_time_factor;
  const double before = agent.minutes_since_meal;
  agent.minutes_since_meal += dt;
  const double hungry_minutes = std::max(0.0, agent.minutes_since_meal - std::max(before, onset));
  agent.hunger_level += needs.hunger_rate * agent.params.appetite_rate_factor * hungry_minutes;
  if (awake && agent.activity != Activity::Recreating) agent.social_level += needs.social_need_rate * dt;
}

bool draw_work_skip(const BehaviorParams& params, Rng& rng) {
  return params.work_skip_prob > 0.0 && rng.bernoulli(params.work_skip_prob);
}

SiteId choose_recreation(AgentState& agent, const WorldMap& world, Rng& rng) {
  const auto& all = world.sites_of_kind(SiteKind::Recreation);
  const NodeId from = world.site(agent.site).attached_node;
  SiteId choice;
  if (agent.params.social_random_prob > 0.0 && rng.bernoulli(agent.params.social_random_prob)) {
    choice = all[rng.index(all.size())];
  } else {
    const bool nearest = rng.uniform01() < kNearestRecreationProb || agent.favorite_sites.empty();
    if (nearest) {
      try {
        choice = world.nearest_site_from_node(from, SiteKind::Recreation, agent.interest_group()).id;
      } catch (const NotFoundError&) {
        choice = world.nearest_site_from_node(from, SiteKind::Recreation).id;
      }
    } else {
      choice = agent.favorite_sites[rng.index(agent.favorite_sites.size())];
    }
  }
  auto& fav = agent.favorite_sites;
  fav.erase(std::remove(fav.begin(), fav.end(), choice), fav.end());
  fav.push_back(choice);
  while (fav.size() > kFavoriteSitesCapacity) fav.pop_front();
  return choice;
}

std::vector<SocialLink> colocation_update(std::span<AgentState* const> agents_at_site, SiteId /*site*/,
                                          Timestamp clock) {
  std::vector<AgentState*> present(agents_at_site.begin(), agents_at_site.end());
  std::sort(present.begin(), present.end(), [](const AgentState* a, const AgentState* b) { return a->id < b->id; });
  std::vector<SocialLink> links;
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = i + 1; j < present.size(); ++j) {
      AgentState& a = *present[i];
      AgentState& b = *present[j];
      if (a.id == b.id || a.friends.contains(b.id)) continue;
      a.friends.insert(b.id);
      b.friends.insert(a.id);
      links.push_back({a.id, b.id, clock});
    }
  }
  return links;
}

void activate_profile(AgentState& agent, const AnomalyProfile& profile) {
  if (!agent.saved_params) agent.saved_params = agent.params;
  agent.params = apply_profile(*agent.saved_params, profile);
}

void deactivate(AgentState& agent) {
  if (!agent.saved_params) return;
  agent.params = *agent.saved_params;
  agent.saved_params.reset();
}

namespace {

void start_activity(AgentState& a, Activity activity, Timestamp at, const NeedsConfig& needs) {
  a.activity = activity;
  if (activity == Activity::Eating) {
    a.activity_end = at + static_cast<std::int64_t>(std::llround(needs.meal_duration_min));
  } else if (activity == Activity::Recreating) {
    a.activity_end = at + static_cast<std::int64_t>(std::llround(needs.recreation_duration_min));
  }
}

void arrive(AgentState& a, SiteId dest, Activity purpose, Timestamp at, const TickContext& ctx) {
  a.travel.reset();
  a.site = dest;
  a.stay_arrival = at;
  a.position = ctx.world.site(dest).position;
  start_activity(a, purpose, at, ctx.needs);
}

/// Heads to `dest` for `purpose`, closing the current stay if the agent leaves.
void go_to(AgentState& a, SiteId dest, Activity purpose, const TickContext& ctx, TickEvents& events) {
  const Timestamp now = ctx.now;
  if (a.site == dest) {
    if (a.activity != purpose) start_activity(a, purpose, now, ctx.needs);
    return;
  }
  if (a.stay_arrival < now) {
    events.closed_stay = StayRecord{a.id, a.site, ctx.world.site(a.site).kind, a.stay_arrival, now};
  }
  Route route = ctx.world.route(ctx.world.site(a.site).attached_node, dest);
  if (route.length() <= 0.0) {
    arrive(a, dest, purpose, now, ctx);
    return;
  }
  a.activity = Activity::Traveling;
  a.travel = Travel{dest, purpose, std::move(route), 0.0};
  a.travel->travelled_m = std::min(kTickTravelM, a.travel->route.length());
  if (a.travel->remaining_m() <= 0.0) {
    arrive(a, dest, purpose, now + kTickMinutes, ctx);
  } else {
    a.position = a.travel->route.point_at(a.travel->travelled_m);
  }
}

}  // namespace

TickEvents tick(AgentState& a, const TickContext& ctx, Rng& rng) {
  TickEvents events;
  const Timestamp now = ctx.now;
  const bool sleep_time = ctx.schedule.is_sleep_time(now);
  const bool at_home = !a.traveling() && a.site == a.home;
  const bool asleep = sleep_time && at_home && a.activity == Activity::AtHome;
  update_needs(a, ctx.needs, static_cast<double>(kTickMinutes), !asleep);

  if (a.traveling()) {
    Travel& t = *a.travel;
    t.travelled_m = std::min(t.travelled_m + kTickTravelM, t.route.length());
    if (t.remaining_m() <= 0.0) {
      arrive(a, t.destination, t.purpose, now + kTickMinutes, ctx);
    } else {
      a.position = t.route.point_at(t.travelled_m);
    }
    return events;
  }

  if (a.activity == Activity::Eating) {
    if (now < a.activity_end) return events;
    a.hunger_level = 0.0;
    a.minutes_since_meal = 0.0;
    a.activity = a.site == a.home ? Activity::AtHome : Activity::Working;  // replaced by the decision below
  }
  bool recreating = a.activity == Activity::Recreating;
  if (recreating && now >= a.activity_end) {
    a.social_level = 0.0;
    recreating = false;
    a.activity = Activity::AtHome;
  }

  const SiteKind here = ctx.world.site(a.site).kind;
  if (a.hunger_level >= ctx.needs.hunger_critical && !(sleep_time && a.site == a.home)) {
    if (a.site == a.home || here == SiteKind::Restaurant) {
      start_activity(a, Activity::Eating, now, ctx.needs);
    } else {
      const NodeId node = ctx.world.site(a.site).attached_node;
      go_to(a, ctx.world.nearest_site_from_node(node, SiteKind::Restaurant).id, Activity::Eating, ctx, events);
    }
    return events;
  }

  if (sleep_time) {
    if (!recreating) go_to(a, a.home, Activity::AtHome, ctx, events);
    return events;
  }

  if (ctx.schedule.in_work_hours(now)) {
    const std::int64_t today = day_index(now);
    if (a.work_decision_day != today) {
      a.work_decision_day = today;
      a.skipping_work_today = draw_work_skip(a.params, rng);
      events.work_decision = WorkDecision{a.id, now, a.params.work_skip_prob, a.skipping_work_today};
    }
    if (!a.skipping_work_today) {
      go_to(a, a.workplace, Activity::Working, ctx, events);
      return events;
    }
  }

  if (recreating) return events;
  if (a.social_level >= ctx.needs.social_critical) {
    const SiteId dest = choose_recreation(a, ctx.world, rng);
    go_to(a, dest, Activity::Recreating, ctx, events);
    return events;
  }
  go_to(a, a.home, Activity::AtHome, ctx, events);
  return events;
}

}  // namespace uas
