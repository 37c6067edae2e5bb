#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "uas/error.hpp"
#include "uas/worldmap.hpp"

using namespace uas;

namespace {

// Two nodes joined by a 100 m road, one site of each kind.
RoadGraph line_graph() {
  RoadGraph g;
  g.nodes = {{0, {0, 0}}, {1, {100, 0}}, {2, {200, 0}}};
  g.edges = {{0, 1, 100}, {1, 2, 100}};
  return g;
}

std::vector<SiteDecl> one_of_each() {
  return {{10, SiteKind::Home, 0, std::nullopt},
          {11, SiteKind::Workplace, 2, std::nullopt},
          {12, SiteKind::Restaurant, 1, std::nullopt},
          {13, SiteKind::Recreation, 2, 0}};
}

LoadErrorKind load_kind(RoadGraph g, std::vector<SiteDecl> sites) {
  try {
    WorldMap("t", {33.0, -84.0}, std::move(g), sites);
  } catch (const LoadError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected LoadError";
  return LoadErrorKind::Io;
}

// Independent all-pairs oracle.
std::vector<std::vector<double>> floyd_warshall(const RoadGraph& g) {
  const std::size_t n = g.nodes.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : g.edges) {
    const auto a = static_cast<std::size_t>(e.a);
    const auto b = static_cast<std::size_t>(e.b);
    d[a][b] = std::min(d[a][b], e.length);
    d[b][a] = std::min(d[b][a], e.length);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

}  // namespace

TEST(WorldMap, BuildsAndLooksUp) {
  WorldMap w("t", {33.0, -84.0}, line_graph(), one_of_each());
  EXPECT_EQ(w.site(12).kind, SiteKind::Restaurant);
  EXPECT_EQ(w.site(13).position, (Point{200, 0}));
  EXPECT_THROW(w.site(99), LookupError);
  EXPECT_DOUBLE_EQ(w.shortest_path_length(10, 11), 200.0);
  EXPECT_EQ(w.interest_group_count(), 1);
}

TEST(WorldMap, ValidationNamesTheViolation) {
  auto dup = one_of_each();
  dup[1].id = 10;
  EXPECT_EQ(load_kind(line_graph(), dup), LoadErrorKind::DuplicateId);

  auto g = line_graph();
  g.nodes.push_back({3, {500, 500}});
  EXPECT_EQ(load_kind(g, one_of_each()), LoadErrorKind::DisconnectedGraph);

  g = line_graph();
  g.edges[0].length = 50;  // shorter than the straight line
  EXPECT_EQ(load_kind(g, one_of_each()), LoadErrorKind::InvalidGeometry);

  auto no_rest = one_of_each();
  no_rest.erase(no_rest.begin() + 2);
  EXPECT_EQ(load_kind(line_graph(), no_rest), LoadErrorKind::MissingSiteKind);

  auto ungrouped = one_of_each();
  ungrouped[3].group.reset();
  EXPECT_EQ(load_kind(line_graph(), ungrouped), LoadErrorKind::Schema);

  g = line_graph();
  g.edges.push_back({1, 7, 10});
  EXPECT_EQ(load_kind(g, one_of_each()), LoadErrorKind::Schema);
}

TEST(WorldMap, ShortestPathsMatchFloydWarshall) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SyntheticMapSpec spec;
    spec.rows = 6;
    spec.cols = 7;
    spec.block_m = 120;
    spec.seed = seed;
    const WorldMap w = generate_synthetic_map(spec);
    const auto d = floyd_warshall(w.graph());
    for (const auto& a : w.sites()) {
      for (const auto& b : w.sites()) {
        const double want = d[static_cast<std::size_t>(a.attached_node)][static_cast<std::size_t>(b.attached_node)];
        ASSERT_NEAR(w.shortest_path_length(a.id, b.id), want, 1e-9);
        ASSERT_NEAR(w.shortest_path_length(a.id, b.id), w.shortest_path_length(b.id, a.id), 1e-9);
      }
    }
  }
}

TEST(WorldMap, RouteLengthEqualsDistance) {
  const WorldMap w = generate_synthetic_map({});
  for (const auto& s : w.sites()) {
    const Route r = w.route(0, s.id);
    EXPECT_NEAR(r.length(), w.distance_from_node(0, s.id), 1e-9);
    EXPECT_EQ(r.waypoints.back(), s.position);
    EXPECT_EQ(r.point_at(0.0), w.graph().nodes[0].position);
    EXPECT_EQ(r.point_at(1e9), s.position);
  }
}

TEST(WorldMap, NearestSiteMatchesLinearScan) {
  const WorldMap w = generate_synthetic_map({});
  for (const auto& n : w.graph().nodes) {
    for (SiteKind kind : kAllSiteKinds) {
      SiteId best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& s : w.sites()) {  // sites() is in ascending id order
        if (s.kind != kind) continue;
        const double d = w.distance_from_node(n.id, s.id);
        if (d < best_d) best_d = d, best = s.id;
      }
      EXPECT_EQ(w.nearest_site_from_node(n.id, kind).id, best);
    }
  }
  EXPECT_THROW(w.nearest_site_from_node(0, SiteKind::Recreation, 99), NotFoundError);
}

TEST(WorldMap, NearestNodeTiesToLowestId) {
  WorldMap w("t", {33.0, -84.0}, line_graph(), one_of_each());
  EXPECT_EQ(w.nearest_node({50, 0}), 0);
  EXPECT_EQ(w.nearest_node({151, 3}), 2);
}

TEST(WorldMap, ProjectionRoundTripAndBounds) {
  const WorldMap w = generate_synthetic_map({});
  for (const auto& n : w.graph().nodes) {
    const LatLon ll = w.to_wgs84(n.position);
    const Point back = w.from_wgs84(ll);
    EXPECT_NEAR(back.x, n.position.x, 1e-6);
    EXPECT_NEAR(back.y, n.position.y, 1e-6);
  }
  const LatLon origin = w.to_wgs84({0, 0});
  EXPECT_DOUBLE_EQ(origin.lat, 33.7490);
  EXPECT_DOUBLE_EQ(origin.lon, -84.3880);
  // 1 km north is 1000 / 111320 degrees of latitude.
  EXPECT_NEAR(w.to_wgs84({0, 1000}).lat - origin.lat, 1000.0 / 111320.0, 1e-12);
  EXPECT_THROW(w.to_wgs84({0, 50000}), ProjectionError);
}

TEST(WorldMap, SerializeRoundTrip) {
  const WorldMap w = generate_synthetic_map({});
  const WorldMap back = parse_map(serialize_map(w));
  EXPECT_EQ(back.graph(), w.graph());
  EXPECT_EQ(back.sites(), w.sites());
  EXPECT_EQ(back.region(), w.region());
  EXPECT_EQ(serialize_map(back), serialize_map(w));
}

TEST(WorldMap, ParseErrorsAreTyped) {
  try {
    parse_map("{not json");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.kind(), LoadErrorKind::Parse);
  }
  try {
    parse_map(R"({"region":"x"})");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.kind(), LoadErrorKind::Schema);
  }
  try {
    load_map("/nonexistent/map.json");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.kind(), LoadErrorKind::Io);
  }
}

TEST(WorldMap, SyntheticMapHasRequestedCounts) {
  SyntheticMapSpec spec;
  spec.homes = 7;
  spec.recreation = 9;
  spec.interest_groups = 3;
  const WorldMap w = generate_synthetic_map(spec);
  EXPECT_EQ(w.sites_of_kind(SiteKind::Home).size(), 7u);
  EXPECT_EQ(w.sites_of_kind(SiteKind::Recreation).size(), 9u);
  EXPECT_EQ(w.interest_group_count(), 3);
  EXPECT_EQ(generate_synthetic_map(spec).sites(), w.sites());
  spec.homes = 0;
  EXPECT_THROW(generate_synthetic_map(spec), ConfigError);
}

namespace {
struct Visit {
  SiteId site_id;
  SiteKind kind;
};
}  // namespace

TEST(WorldMap, PopularityRank) {
  std::vector<Visit> log;
  for (int i = 0; i < 9; ++i) log.push_back({1, SiteKind::Recreation});
  for (int i = 0; i < 3; ++i) log.push_back({2, SiteKind::Recreation});
  for (int i = 0; i < 20; ++i) log.push_back({3, SiteKind::Restaurant});
  log.push_back({5, SiteKind::Recreation});
  log.push_back({4, SiteKind::Recreation});
  EXPECT_EQ(popularity_rank(log, SiteKind::Recreation), (std::vector<SiteId>{1, 2, 4, 5}));
  EXPECT_THROW(popularity_rank(std::vector<Visit>{}, SiteKind::Recreation), NotFoundError);
}
