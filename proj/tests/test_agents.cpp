#include <gtest/gtest.h>

#include <map>
#include <set>

#include "uas/agents.hpp"
#include "uas/error.hpp"

using namespace uas;

namespace {

// Nodes 0-1-2-3 on a line, 300 m apart.
WorldMap line_world(bool restaurant_at_home_node = false) {
  RoadGraph g;
  for (int i = 0; i < 4; ++i) g.nodes.push_back({i, {300.0 * i, 0}});
  for (int i = 0; i < 3; ++i) g.edges.push_back({i, i + 1, 300.0});
  std::vector<SiteDecl> sites{{10, SiteKind::Home, 0, std::nullopt},
                              {11, SiteKind::Workplace, 3, std::nullopt},
                              {12, SiteKind::Restaurant, restaurant_at_home_node ? 0 : 2, std::nullopt},
                              {13, SiteKind::Recreation, 1, 0},
                              {14, SiteKind::Recreation, 3, 1}};
  return WorldMap("line", {33.7, -84.4}, g, sites);
}

AgentState agent_at_home(const WorldMap& w, Timestamp t) {
  AgentState a;
  a.id = 0;
  a.home = 10;
  a.workplace = 11;
  a.site = 10;
  a.stay_arrival = t;
  a.position = w.site(10).position;
  return a;
}

// Monday 2024-01-01 at hh:mm.
Timestamp at(int hh, int mm, int day = 0) { return kDefaultEpoch + day * kMinutesPerDay + hh * 60 + mm; }

}  // namespace

TEST(Population, InitialisationRespectsRanges) {
  const WorldMap w = generate_synthetic_map({});
  Rng rng(1);
  const NeedsConfig needs;
  const auto agents = initialize_population(w, 500, needs, kDefaultEpoch, rng);
  ASSERT_EQ(agents.size(), 500u);
  std::set<int> groups;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    EXPECT_EQ(a.id, static_cast<AgentId>(i));
    EXPECT_EQ(w.site(a.home).kind, SiteKind::Home);
    EXPECT_EQ(w.site(a.workplace).kind, SiteKind::Workplace);
    EXPECT_GE(a.params.appetite_time_factor, 0.8);
    EXPECT_LT(a.params.appetite_time_factor, 1.2);
    EXPECT_GE(a.social_level, 0.0);
    EXPECT_LT(a.social_level, needs.social_critical);
    EXPECT_EQ(a.site, a.home);
    groups.insert(a.interest_group());
  }
  EXPECT_EQ(groups.size(), 3u);
  const auto again = initialize_population(w, 500, needs, kDefaultEpoch, std::uint64_t{1});
  const auto first = initialize_population(w, 500, needs, kDefaultEpoch, std::uint64_t{1});
  for (std::size_t i = 0; i < 500; ++i) EXPECT_EQ(again[i].params, first[i].params);
  EXPECT_THROW(initialize_population(w, 0, needs, kDefaultEpoch, rng), ConfigError);
}

TEST(Needs, HungerStartsAfterOnset) {
  NeedsConfig needs;
  AgentState a;
  update_needs(a, needs, needs.time_to_hunger_min - 5);
  EXPECT_EQ(a.hunger_level, 0.0);
  update_needs(a, needs, 10);
  EXPECT_DOUBLE_EQ(a.hunger_level, 5.0 * needs.hunger_rate);
  EXPECT_DOUBLE_EQ(a.social_level, (needs.time_to_hunger_min + 5) * needs.social_need_rate);
}

TEST(Needs, RedHungerIsImmediateAndTripled) {
  NeedsConfig needs;
  AgentState a;
  activate_profile(a, profile_for(AnomalyType::Hunger, Intensity::Red));
  EXPECT_EQ(a.params.appetite_time_factor, 0.0);
  EXPECT_EQ(a.params.appetite_rate_factor, 3.0);
  update_needs(a, needs, 5);
  EXPECT_DOUBLE_EQ(a.hunger_level, 15.0 * needs.hunger_rate);
}

TEST(Needs, SocialPausesWhileAsleepOrRecreating) {
  NeedsConfig needs;
  AgentState a;
  update_needs(a, needs, 60, false);
  EXPECT_EQ(a.social_level, 0.0);
  a.activity = Activity::Recreating;
  update_needs(a, needs, 60, true);
  EXPECT_EQ(a.social_level, 0.0);
}

TEST(Needs, HungerIsMonotoneProperty) {
  Rng rng(2);
  NeedsConfig needs;
  for (int trial = 0; trial < 200; ++trial) {
    AgentState a;
    a.params.appetite_time_factor = rng.uniform(0.0, 1.2);
    a.params.appetite_rate_factor = rng.uniform(1.0, 3.0);
    double prev = 0.0;
    for (int i = 0; i < 300; ++i) {
      update_needs(a, needs, 5, rng.bernoulli(0.5));
      ASSERT_GE(a.hunger_level, prev);
      prev = a.hunger_level;
    }
  }
}

TEST(Schedule, Windows) {
  Schedule s;
  EXPECT_TRUE(s.in_work_hours(at(9, 0)));
  EXPECT_FALSE(s.in_work_hours(at(17, 0)));
  EXPECT_FALSE(s.in_work_hours(at(10, 0, 5)));  // Saturday
  EXPECT_TRUE(s.is_sleep_time(at(23, 0)));
  EXPECT_TRUE(s.is_sleep_time(at(5, 55)));
  EXPECT_FALSE(s.is_sleep_time(at(6, 0)));
  s.work_start = 541;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Tick, HungryAtHomeEatsInPlace) {
  const WorldMap w = line_world();
  NeedsConfig needs;
  Schedule sched;
  AgentState a = agent_at_home(w, at(6, 0));
  a.hunger_level = needs.hunger_critical;
  Rng rng(1);
  const auto ev = tick(a, {w, needs, sched, at(7, 0)}, rng);
  EXPECT_EQ(a.activity, Activity::Eating);
  EXPECT_EQ(a.site, 10);
  EXPECT_FALSE(ev.closed_stay);
}

TEST(Tick, MovesFiveKilometresPerHourAndStampsArrival) {
  const WorldMap w = line_world();
  NeedsConfig needs;
  Schedule sched;
  AgentState a = agent_at_home(w, at(6, 0));
  Rng rng(1);
  // 09:00 Monday: head to work, 900 m away.
  auto ev = tick(a, {w, needs, sched, at(9, 0)}, rng);
  ASSERT_TRUE(ev.closed_stay);
  EXPECT_EQ(ev.closed_stay->departure, at(9, 0));
  EXPECT_EQ(ev.closed_stay->kind, SiteKind::Home);
  ASSERT_TRUE(a.traveling());
  EXPECT_NEAR(a.position.x, kTickTravelM, 1e-9);
  tick(a, {w, needs, sched, at(9, 5)}, rng);
  EXPECT_NEAR(a.position.x, 2 * kTickTravelM, 1e-9);
  tick(a, {w, needs, sched, at(9, 10)}, rng);
  // 900 m takes three ticks (1250 m of capacity); arrival at the end of the third.
  EXPECT_FALSE(a.traveling());
  EXPECT_EQ(a.site, 11);
  EXPECT_EQ(a.stay_arrival, at(9, 15));
  EXPECT_EQ(a.position, w.site(11).position);
}

TEST(Tick, ZeroLengthRouteArrivesImmediately) {
  const WorldMap w = line_world(true);
  NeedsConfig needs;
  Schedule sched;
  AgentState a = agent_at_home(w, at(6, 0));
  a.site = 11;  // at work; nearest restaurant shares the home node, 900 m away
  a.position = w.site(11).position;
  a.activity = Activity::Working;
  a.stay_arrival = at(9, 0);
  a.hunger_level = needs.hunger_critical + 1;
  Rng rng(1);
  tick(a, {w, needs, sched, at(12, 0)}, rng);
  ASSERT_TRUE(a.traveling());
  EXPECT_EQ(a.travel->destination, 12);
  for (int m = 5; a.traveling(); m += 5) tick(a, {w, needs, sched, at(12, m)}, rng);
  EXPECT_EQ(a.activity, Activity::Eating);
  EXPECT_EQ(a.stay_arrival, at(12, 15));

  // Home shares node 0 with the restaurant: going home is instantaneous.
  AgentState b = agent_at_home(w, at(6, 0));
  b.site = 12;
  b.position = w.site(12).position;
  b.stay_arrival = at(12, 0);
  b.activity = Activity::AtHome;
  const auto ev = tick(b, {w, needs, sched, at(18, 0)}, rng);
  EXPECT_FALSE(b.traveling());
  EXPECT_EQ(b.site, 10);
  EXPECT_EQ(b.stay_arrival, at(18, 0));
  ASSERT_TRUE(ev.closed_stay);
  EXPECT_EQ(ev.closed_stay->site_id, 12);
}

TEST(Tick, RedWorkNeverReachesWorkplace) {
  const WorldMap w = line_world();
  NeedsConfig needs;
  Schedule sched;
  AgentState a = agent_at_home(w, kDefaultEpoch);
  activate_profile(a, profile_for(AnomalyType::Work, Intensity::Red));
  Rng rng(3);
  int decisions = 0;
  for (Timestamp t = kDefaultEpoch; t < kDefaultEpoch + 7 * kMinutesPerDay; t = t + kTickMinutes) {
    const auto ev = tick(a, {w, needs, sched, t}, rng);
    if (ev.work_decision) {
      ++decisions;
      EXPECT_TRUE(ev.work_decision->skipped);
    }
    ASSERT_FALSE(!a.traveling() && a.site == 11);
    ASSERT_FALSE(a.traveling() && a.travel->destination == 11);
  }
  EXPECT_EQ(decisions, 5);
}

TEST(Tick, NormalAgentWorksEveryWorkday) {
  const WorldMap w = line_world();
  NeedsConfig needs;
  Schedule sched;
  AgentState a = agent_at_home(w, kDefaultEpoch);
  Rng rng(3);
  std::map<std::int64_t, int> work_arrivals;
  for (Timestamp t = kDefaultEpoch; t < kDefaultEpoch + 7 * kMinutesPerDay; t = t + kTickMinutes) {
    const auto ev = tick(a, {w, needs, sched, t}, rng);
    if (ev.closed_stay && ev.closed_stay->kind == SiteKind::Workplace) ++work_arrivals[day_index(ev.closed_stay->arrival)];
  }
  EXPECT_EQ(work_arrivals.size(), 5u);
  for (const auto& [day, n] : work_arrivals) {
    EXPECT_LT(weekday(Timestamp::from_days(day)), 5);
    EXPECT_GE(n, 1);
    EXPECT_LE(n, 2);
  }
}

TEST(Recreation, FavouritesAreBoundedLru) {
  const WorldMap w = generate_synthetic_map({});
  AgentState a;
  a.site = w.sites_of_kind(SiteKind::Home).front();
  a.params.social_random_prob = 1.0;
  Rng rng(5);
  std::set<SiteId> chosen;
  for (int i = 0; i < 200; ++i) {
    const SiteId s = choose_recreation(a, w, rng);
    EXPECT_EQ(w.site(s).kind, SiteKind::Recreation);
    EXPECT_EQ(a.favorite_sites.back(), s);
    EXPECT_LE(a.favorite_sites.size(), kFavoriteSitesCapacity);
    chosen.insert(s);
  }
  EXPECT_EQ(chosen.size(), w.sites_of_kind(SiteKind::Recreation).size());
}

TEST(Recreation, NormalChoicePrefersOwnGroup) {
  const WorldMap w = generate_synthetic_map({});
  AgentState a;
  a.site = w.sites_of_kind(SiteKind::Home).front();
  a.params.interest_group = 1;
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const SiteId s = choose_recreation(a, w, rng);
    EXPECT_EQ(w.site(s).interest_group, 1);
  }
}

TEST(Colocation, OneLinkPerNewPair) {
  std::vector<AgentState> agents(4);
  for (int i = 0; i < 4; ++i) agents[static_cast<std::size_t>(i)].id = 3 - i;
  std::vector<AgentState*> ptrs;
  for (auto& a : agents) ptrs.push_back(&a);
  const auto links = colocation_update(ptrs, 13, kDefaultEpoch);
  EXPECT_EQ(links.size(), 6u);
  for (const auto& l : links) {
    EXPECT_LT(l.agent_id, l.friend_id);
    EXPECT_EQ(l.time, kDefaultEpoch);
  }
  EXPECT_TRUE(colocation_update(ptrs, 13, kDefaultEpoch + 5).empty());
  for (const auto& a : agents) EXPECT_EQ(a.friends.size(), 3u);
}

TEST(Profiles, DeactivateRestoresExactParameters) {
  Rng rng(8);
  for (auto type : kAllAnomalyTypes) {
    for (auto intensity : kAllIntensities) {
      AgentState a;
      a.params.appetite_time_factor = rng.uniform(0.8, 1.2);
      a.params.interest_group = 2;
      const BehaviorParams before = a.params;
      activate_profile(a, profile_for(type, intensity));
      a.params.interest_group = 0;  // as an interest switch would
      deactivate(a);
      EXPECT_EQ(a.params, before);
      EXPECT_FALSE(a.saved_params);
    }
  }
}
