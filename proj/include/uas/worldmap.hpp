#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ranges>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uas/error.hpp"

namespace uas {

using NodeId = std::int64_t;
using SiteId = std::int32_t;

enum class SiteKind { Home, Workplace, Restaurant, Recreation };

inline constexpr SiteKind kAllSiteKinds[] = {SiteKind::Home, SiteKind::Workplace, SiteKind::Restaurant,
                                            SiteKind::Recreation};

std::string_view to_string(SiteKind kind);
/// Exact spelling: Home | Workplace | Restaurant | Recreation.
std::optional<SiteKind> parse_site_kind(std::string_view text);

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double euclidean(Point a, Point b);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const LatLon&) const = default;
};

struct Site {
  SiteId id = 0;
  SiteKind kind = SiteKind::Home;
  Point position;
  std::optional<int> interest_group;  // present iff kind == Recreation
  NodeId attached_node = 0;
  bool operator==(const Site&) const = default;
};

struct RoadNode {
  NodeId id = 0;
  Point position;
  bool operator==(const RoadNode&) const = default;
};

struct RoadEdge {
  NodeId a = 0;
  NodeId b = 0;
  double length = 0.0;
  bool operator==(const RoadEdge&) const = default;
};

struct RoadGraph {
  std::vector<RoadNode> nodes;
  std::vector<RoadEdge> edges;
  bool operator==(const RoadGraph&) const = default;
};

/// Site as declared in a map file; the position is taken from the attached node.
struct SiteDecl {
  SiteId id = 0;
  SiteKind kind = SiteKind::Home;
  NodeId node = 0;
  std::optional<int> group;
};

/// A walkable polyline between two road nodes.
struct Route {
  std::vector<Point> waypoints;   // at least one point
  std::vector<double> cumulative; // along-path distance at each waypoint, starts at 0

  double length() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  /// Position after travelling `distance` metres from the start (clamped to the ends).
  Point point_at(double distance) const;
};

/// Immutable spatial world: road graph, typed sites and routing tables.
/// All queries are const and free of interior mutation, so one instance can be
/// shared by concurrently running scenarios.
class WorldMap {
 public:
  /// Validates every invariant; throws LoadError naming the violated one.
  WorldMap(std::string region, LatLon anchor, RoadGraph graph, const std::vector<SiteDecl>& sites);

  const std::string& region() const { return region_; }
  LatLon anchor() const { return anchor_; }
  const RoadGraph& graph() const { return graph_; }
  const std::vector<Site>& sites() const { return sites_; }
  /// Ids of sites of the given kind, ascending.
  const std::vector<SiteId>& sites_of_kind(SiteKind kind) const;
  /// Number of distinct interest groups (max group + 1).
  int interest_group_count() const { return group_count_; }

  bool has_site(SiteId id) const { return site_index_.contains(id); }
  /// Throws LookupError for unknown ids.
  const Site& site(SiteId id) const;

  /// Road distance between the attached nodes of two sites. Throws LookupError.
  double shortest_path_length(SiteId a, SiteId b) const;
  /// Road distance from a road node (by id) to a site.
  double distance_from_node(NodeId from, SiteId to) const;

  /// Nearest road node to a point (Euclidean), ties to the lowest node id.
  NodeId nearest_node(Point p) const;

  /// Site of `kind` (and, if given, interest group) with the smallest road
  /// distance from the node nearest `from`; ties to the lowest site id.
  /// Throws NotFoundError when nothing matches.
  const Site& nearest_site(Point from, SiteKind kind, std::optional<int> group = std::nullopt) const;
  const Site& nearest_site_from_node(NodeId from, SiteKind kind, std::optional<int> group = std::nullopt) const;

  /// Shortest road route from a node to a site's attached node.
  Route route(NodeId from, SiteId to) const;

  /// Local equirectangular projection about the anchor.
  /// Throws ProjectionError outside the node bounding box padded by 10 km.
  LatLon to_wgs84(Point p) const;
  Point from_wgs84(LatLon ll) const;

  struct Bounds {
    double min_x, min_y, max_x, max_y;
  };
  Bounds bounds() const { return bounds_; }
  bool within_padded_bounds(Point p) const;

  static constexpr double kMetersPerDegree = 111320.0;
  static constexpr double kBoundsPadding = 10000.0;

 private:
  std::size_t node_index(NodeId id) const;
  const std::vector<double>& tree_distances(std::size_t target_node) const;

  std::string region_;
  LatLon anchor_;
  RoadGraph graph_;
  std::vector<Site> sites_;
  std::unordered_map<NodeId, std::size_t> node_index_;
  std::unordered_map<SiteId, std::size_t> site_index_;
  std::map<SiteKind, std::vector<SiteId>> by_kind_;
  int group_count_ = 0;
  Bounds bounds_{};

  // Shortest-path trees rooted at every node that carries a site.
  std::vector<int> tree_of_node_;                 // node index -> tree slot or -1
  std::vector<std::vector<double>> tree_dist_;     // slot -> distance from every node
  std::vector<std::vector<std::int32_t>> tree_next_;  // slot -> next hop toward the root
};

struct SyntheticMapSpec {
  int rows = 10;  // nodes per column
  int cols = 10;  // nodes per row
  double block_m = 100.0;
  int homes = 50;
  int workplaces = 10;
  int restaurants = 10;
  int recreation = 10;
  int interest_groups = 3;
  std::uint64_t seed = 1;
  LatLon anchor{33.7490, -84.3880};
  std::string region = "synthetic";
  bool operator==(const SyntheticMapSpec&) const = default;
};

/// Connected grid road network with sites on random nodes. Throws ConfigError
/// for zero counts, fewer than 2 groups or a grid smaller than 2x2.
WorldMap generate_synthetic_map(const SyntheticMapSpec& spec);

/// Reads the JSON map schema; throws LoadError.
WorldMap load_map(const std::filesystem::path& path);
WorldMap parse_map(std::string_view json_text);
std::string serialize_map(const WorldMap& map);

template <typename R>
concept SiteVisitRecord = requires(const R& r) {
  { r.site_id } -> std::convertible_to<SiteId>;
  { r.kind } -> std::convertible_to<SiteKind>;
};

/// Sites of `kind` ordered by visit count, descending; ties to the lowest id.
/// Throws NotFoundError when the log holds no visit of that kind.
template <std::ranges::input_range Log>
  requires SiteVisitRecord<std::ranges::range_value_t<Log>>
std::vector<SiteId> popularity_rank(const Log& visit_log, SiteKind kind) {
  std::map<SiteId, std::size_t> counts;
  for (const auto& visit : visit_log) {
    if (visit.kind == kind) ++counts[visit.site_id];
  }
  if (counts.empty()) throw NotFoundError("no visits of kind " + std::string(to_string(kind)));
  std::vector<std::pair<SiteId, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<SiteId> out;
  out.reserve(ranked.size());
  for (const auto& [id, n] : ranked) out.push_back(id);
  return out;
}

}  // namespace uas
