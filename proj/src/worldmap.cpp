#include "uas/worldmap.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uas/rng.hpp"

namespace uas {

using json = nlohmann::json;

std::string_view to_string(SiteKind kind) {
  switch (kind) {
    case SiteKind::Home: return "Home";
    case SiteKind::Workplace: return "Workplace";
    case SiteKind::Restaurant: return "Restaurant";
    case SiteKind::Recreation: return "Recreation";
  }
  return "?";
}

std::optional<SiteKind> parse_site_kind(std::string_view text) {
  for (SiteKind k : kAllSiteKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

double euclidean(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point Route::point_at(double distance) const {
  if (waypoints.size() == 1 || distance <= 0.0) return waypoints.front();
  if (distance >= length()) return waypoints.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), distance);
  const std::size_t i = static_cast<std::size_t>(it - cumulative.begin());  // segment (i-1, i)
  const double seg = cumulative[i] - cumulative[i - 1];
  const double f = seg > 0.0 ? (distance - cumulative[i - 1]) / seg : 1.0;
  const Point a = waypoints[i - 1];
  const Point b = waypoints[i];
  return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
}

WorldMap::WorldMap(std::string region, LatLon anchor, RoadGraph graph, const std::vector<SiteDecl>& sites)
    : region_(std::move(region)), anchor_(anchor), graph_(std::move(graph)) {
  if (graph_.nodes.empty()) throw LoadError(LoadErrorKind::Schema, "road graph has no nodes");
  if (!(anchor_.lat > -89.0 && anchor_.lat < 89.0) || !(anchor_.lon >= -180.0 && anchor_.lon <= 180.0)) {
    throw LoadError(LoadErrorKind::Schema, "anchor out of range");
  }

  for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
    const auto& n = graph_.nodes[i];
    if (!std::isfinite(n.position.x) || !std::isfinite(n.position.y)) {
      throw LoadError(LoadErrorKind::InvalidGeometry, "node " + std::to_string(n.id) + " has non-finite position");
    }
    if (!node_index_.emplace(n.id, i).second) {
      throw LoadError(LoadErrorKind::DuplicateId, "node id " + std::to_string(n.id));
    }
  }

  // Adjacency keeps the shortest parallel edge.
  const std::size_t n_nodes = graph_.nodes.size();
  std::vector<std::map<std::size_t, double>> adjacency(n_nodes);
  for (const auto& e : graph_.edges) {
    const auto ia = node_index_.find(e.a);
    const auto ib = node_index_.find(e.b);
    if (ia == node_index_.end() || ib == node_index_.end()) {
      throw LoadError(LoadErrorKind::Schema,
                      "edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) + ") references an unknown node");
    }
    if (ia->second == ib->second) {
      throw LoadError(LoadErrorKind::InvalidGeometry, "self-loop at node " + std::to_string(e.a));
    }
    const double straight = euclidean(graph_.nodes[ia->second].position, graph_.nodes[ib->second].position);
    if (!std::isfinite(e.length) || e.length < straight - 1e-6) {
      throw LoadError(LoadErrorKind::InvalidGeometry, "edge (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                                                          ") is shorter than the straight-line distance");
    }
    for (auto [u, v] : {std::pair{ia->second, ib->second}, std::pair{ib->second, ia->second}}) {
      auto [it, inserted] = adjacency[u].emplace(v, e.length);
      if (!inserted) it->second = std::min(it->second, e.length);
    }
  }

  {
    std::vector<bool> seen(n_nodes, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& [v, len] : adjacency[u]) {
        if (!seen[v]) {
          seen[v] = true;
          ++reached;
          stack.push_back(v);
        }
      }
    }
    if (reached != n_nodes) {
      throw LoadError(LoadErrorKind::DisconnectedGraph, "disconnected graph: " + std::to_string(n_nodes - reached) +
                                                            " of " + std::to_string(n_nodes) +
                                                            " nodes unreachable from node " +
                                                            std::to_string(graph_.nodes[0].id));
    }
  }

  sites_.reserve(sites.size());
  for (const auto& d : sites) {
    const auto it = node_index_.find(d.node);
    if (it == node_index_.end()) {
      throw LoadError(LoadErrorKind::Schema,
                      "site " + std::to_string(d.id) + " attached to unknown node " + std::to_string(d.node));
    }
    if ((d.kind == SiteKind::Recreation) != d.group.has_value()) {
      throw LoadError(LoadErrorKind::Schema, "site " + std::to_string(d.id) +
                                                 (d.kind == SiteKind::Recreation ? ": Recreation site lacks group"
                                                                                 : ": only Recreation sites carry a group"));
    }
    if (d.group && *d.group < 0) {
      throw LoadError(LoadErrorKind::Schema, "site " + std::to_string(d.id) + ": negative group");
    }
    if (!site_index_.emplace(d.id, sites_.size()).second) {
      throw LoadError(LoadErrorKind::DuplicateId, "site id " + std::to_string(d.id));
    }
    sites_.push_back(Site{d.id, d.kind, graph_.nodes[it->second].position, d.group, d.node});
    if (d.group) group_count_ = std::max(group_count_, *d.group + 1);
  }
  for (SiteKind k : kAllSiteKinds) by_kind_[k];
  for (const auto& s : sites_) by_kind_[s.kind].push_back(s.id);
  for (auto& [kind, ids] : by_kind_) {
    if (ids.empty()) throw LoadError(LoadErrorKind::MissingSiteKind, "no " + std::string(to_string(kind)) + " site");
    std::sort(ids.begin(), ids.end());
  }

  bounds_ = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
             std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const auto& n : graph_.nodes) {
    bounds_.min_x = std::min(bounds_.min_x, n.position.x);
    bounds_.min_y = std::min(bounds_.min_y, n.position.y);
    bounds_.max_x = std::max(bounds_.max_x, n.position.x);
    bounds_.max_y = std::max(bounds_.max_y, n.position.y);
  }

  // Dijkstra from every node that carries a site; next hop points toward the root.
  tree_of_node_.assign(n_nodes, -1);
  for (const auto& s : sites_) {
    const std::size_t root = node_index_.at(s.attached_node);
    if (tree_of_node_[root] >= 0) continue;
    tree_of_node_[root] = static_cast<int>(tree_dist_.size());
    std::vector<double> dist(n_nodes, std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> next(n_nodes, -1);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[root] = 0.0;
    pq.push({0.0, root});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (const auto& [v, len] : adjacency[u]) {
        const double nd = d + len;
        if (nd < dist[v]) {
          dist[v] = nd;
          next[v] = static_cast<std::int32_t>(u);
          pq.push({nd, v});
        }
      }
    }
    tree_dist_.push_back(std::move(dist));
    tree_next_.push_back(std::move(next));
  }
}

const std::vector<SiteId>& WorldMap::sites_of_kind(SiteKind kind) const { return by_kind_.at(kind); }

const Site& WorldMap::site(SiteId id) const {
  const auto it = site_index_.find(id);
  if (it == site_index_.end()) throw LookupError("unknown site id " + std::to_string(id));
  return sites_[it->second];
}

std::size_t WorldMap::node_index(NodeId id) const {
  const auto it = node_index_.find(id);
  if (it == node_index_.end()) throw LookupError("unknown node id " + std::to_string(id));
  return it->second;
}

const std::vector<double>& WorldMap::tree_distances(std::size_t target_node) const {
  const int slot = tree_of_node_[target_node];
  if (slot < 0) throw InternalError("no routing tree for node index " + std::to_string(target_node));
  return tree_dist_[static_cast<std::size_t>(slot)];
}

double WorldMap::shortest_path_length(SiteId a, SiteId b) const {
  const Site& sa = site(a);
  const Site& sb = site(b);
  return tree_distances(node_index(sb.attached_node))[node_index(sa.attached_node)];
}

double WorldMap::distance_from_node(NodeId from, SiteId to) const {
  return tree_distances(node_index(site(to).attached_node))[node_index(from)];
}

NodeId WorldMap::nearest_node(Point p) const {
  const RoadNode* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& n : graph_.nodes) {
    const double d = euclidean(p, n.position);
    if (d < best_d || (d == best_d && n.id < best->id)) {
      best = &n;
      best_d = d;
    }
  }
  return best->id;
}

const Site& WorldMap::nearest_site(Point from, SiteKind kind, std::optional<int> group) const {
  return nearest_site_from_node(nearest_node(from), kind, group);
}

const Site& WorldMap::nearest_site_from_node(NodeId from, SiteKind kind, std::optional<int> group) const {
  const std::size_t from_idx = node_index(from);
  const Site* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (SiteId id : sites_of_kind(kind)) {  // ascending ids: strict < keeps the lowest on ties
    const Site& s = sites_[site_index_.at(id)];
    if (group && s.interest_group != group) continue;
    const double d = tree_distances(node_index_.at(s.attached_node))[from_idx];
    if (d < best_d) {
      best = &s;
      best_d = d;
    }
  }
  if (best == nullptr) {
    std::string what = "no " + std::string(to_string(kind)) + " site";
    if (group) what += " in interest group " + std::to_string(*group);
    throw NotFoundError(what);
  }
  return *best;
}

Route WorldMap::route(NodeId from, SiteId to) const {
  const std::size_t target = node_index(site(to).attached_node);
  const int slot = tree_of_node_[target];
  const auto& next = tree_next_[static_cast<std::size_t>(slot)];
  const auto& dist = tree_dist_[static_cast<std::size_t>(slot)];
  Route r;
  std::size_t u = node_index(from);
  r.waypoints.push_back(graph_.nodes[u].position);
  r.cumulative.push_back(0.0);
  const double total = dist[u];
  while (u != target) {
    const auto v = static_cast<std::size_t>(next[u]);
    r.waypoints.push_back(graph_.nodes[v].position);
    r.cumulative.push_back(total - dist[v]);
    u = v;
  }
  return r;
}

bool WorldMap::within_padded_bounds(Point p) const {
  return p.x >= bounds_.min_x - kBoundsPadding && p.x <= bounds_.max_x + kBoundsPadding &&
         p.y >= bounds_.min_y - kBoundsPadding && p.y <= bounds_.max_y + kBoundsPadding;
}

LatLon WorldMap::to_wgs84(Point p) const {
  if (!within_padded_bounds(p)) {
    throw ProjectionError("position (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside the padded map bounds");
  }
  const double cos_lat = std::cos(anchor_.lat * std::numbers::pi / 180.0);
  return {anchor_.lat + p.y / kMetersPerDegree, anchor_.lon + p.x / (kMetersPerDegree * cos_lat)};
}

Point WorldMap::from_wgs84(LatLon ll) const {
  const double cos_lat = std::cos(anchor_.lat * std::numbers::pi / 180.0);
  const Point p{(ll.lon - anchor_.lon) * kMetersPerDegree * cos_lat, (ll.lat - anchor_.lat) * kMetersPerDegree};
  if (!within_padded_bounds(p)) throw ProjectionError("coordinate outside the padded map bounds");
  return p;
}

WorldMap generate_synthetic_map(const SyntheticMapSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) throw ConfigError("synthetic map grid must be at least 2x2");
  if (!(spec.block_m > 0.0)) throw ConfigError("synthetic map block size must be positive");
  if (spec.homes < 1 || spec.workplaces < 1 || spec.restaurants < 1 || spec.recreation < 1) {
    throw ConfigError("synthetic map needs at least one site of every kind");
  }
  if (spec.interest_groups < 2) throw ConfigError("synthetic map needs at least two interest groups");

  RoadGraph g;
  const auto id_of = [&](int r, int c) { return static_cast<NodeId>(r * spec.cols + c); };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      g.nodes.push_back({id_of(r, c), {c * spec.block_m, r * spec.block_m}});
    }
  }
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      if (c + 1 < spec.cols) g.edges.push_back({id_of(r, c), id_of(r, c + 1), spec.block_m});
      if (r + 1 < spec.rows) g.edges.push_back({id_of(r, c), id_of(r + 1, c), spec.block_m});
    }
  }

  Rng rng(spec.seed);
  const std::size_t n_nodes = g.nodes.size();
  std::vector<SiteDecl> sites;
  SiteId next_id = 0;
  const auto place = [&](SiteKind kind, int count) {
    for (int i = 0; i < count; ++i) {
      sites.push_back({next_id++, kind, g.nodes[rng.index(n_nodes)].id, std::nullopt});
    }
  };
  place(SiteKind::Home, spec.homes);
  place(SiteKind::Workplace, spec.workplaces);
  place(SiteKind::Restaurant, spec.restaurants);
  const std::size_t first_rec = sites.size();
  place(SiteKind::Recreation, spec.recreation);

  std::vector<int> groups(static_cast<std::size_t>(spec.recreation));
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i] = static_cast<int>(i % spec.interest_groups);
  rng.shuffle(groups);
  for (std::size_t i = 0; i < groups.size(); ++i) sites[first_rec + i].group = groups[i];

  return WorldMap(spec.region, spec.anchor, std::move(g), sites);
}

namespace {

[[noreturn]] void schema_error(const std::string& what) { throw LoadError(LoadErrorKind::Schema, what); }

double number_at(const json& arr, std::size_t i, const char* what) {
  if (!arr.is_array() || arr.size() <= i || !arr[i].is_number()) schema_error(std::string("malformed ") + what);
  return arr[i].get<double>();
}

std::int64_t integer_at(const json& arr, std::size_t i, const char* what) {
  if (!arr.is_array() || arr.size() <= i || !arr[i].is_number_integer()) schema_error(std::string("malformed ") + what);
  return arr[i].get<std::int64_t>();
}

}  // namespace

WorldMap parse_map(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw LoadError(LoadErrorKind::Parse, e.what());
  }
  if (!doc.is_object()) schema_error("map document must be an object");
  for (const char* key : {"region", "anchor", "nodes", "edges", "sites"}) {
    if (!doc.contains(key)) schema_error(std::string("missing key '") + key + "'");
  }
  if (!doc["region"].is_string()) schema_error("'region' must be a string");
  const json& anchor = doc["anchor"];
  if (!anchor.is_array() || anchor.size() != 2) schema_error("'anchor' must be [lat, lon]");
  const LatLon ll{number_at(anchor, 0, "anchor"), number_at(anchor, 1, "anchor")};

  RoadGraph g;
  if (!doc["nodes"].is_array() || !doc["edges"].is_array() || !doc["sites"].is_array()) {
    schema_error("'nodes', 'edges' and 'sites' must be arrays");
  }
  for (const auto& n : doc["nodes"]) {
    if (!n.is_array() || n.size() != 3) schema_error("node entries must be [id, x, y]");
    g.nodes.push_back({integer_at(n, 0, "node id"), {number_at(n, 1, "node x"), number_at(n, 2, "node y")}});
  }
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 3) schema_error("edge entries must be [a, b, length]");
    g.edges.push_back({integer_at(e, 0, "edge endpoint"), integer_at(e, 1, "edge endpoint"), number_at(e, 2, "edge length")});
  }
  std::vector<SiteDecl> sites;
  for (const auto& s : doc["sites"]) {
    if (!s.is_object()) schema_error("site entries must be objects");
    if (!s.contains("id") || !s["id"].is_number_integer()) schema_error("site without integer 'id'");
    if (!s.contains("kind") || !s["kind"].is_string()) schema_error("site without 'kind'");
    if (!s.contains("node") || !s["node"].is_number_integer()) schema_error("site without integer 'node'");
    const auto kind = parse_site_kind(s["kind"].get<std::string>());
    if (!kind) schema_error("unknown site kind '" + s["kind"].get<std::string>() + "'");
    SiteDecl d{s["id"].get<SiteId>(), *kind, s["node"].get<NodeId>(), std::nullopt};
    if (s.contains("group") && !s["group"].is_null()) {
      if (!s["group"].is_number_integer()) schema_error("site group must be an integer or null");
      d.group = s["group"].get<int>();
    }
    sites.push_back(d);
  }
  return WorldMap(doc["region"].get<std::string>(), ll, std::move(g), sites);
}

WorldMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::Io, "cannot open map file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

std::string serialize_map(const WorldMap& map) {
  json doc;
  doc["region"] = map.region();
  doc["anchor"] = {map.anchor().lat, map.anchor().lon};
  json nodes = json::array();
  for (const auto& n : map.graph().nodes) nodes.push_back({n.id, n.position.x, n.position.y});
  json edges = json::array();
  for (const auto& e : map.graph().edges) edges.push_back({e.a, e.b, e.length});
  json sites = json::array();
  for (const auto& s : map.sites()) {
    json js{{"id", s.id}, {"kind", std::string(to_string(s.kind))}, {"node", s.attached_node}};
    js["group"] = s.interest_group ? json(*s.interest_group) : json(nullptr);
    sites.push_back(std::move(js));
  }
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  doc["sites"] = std::move(sites);
  return doc.dump();
}

}  // namespace uas
