#include "uas/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "uas/error.hpp"
#include "uas/textio.hpp"

namespace uas {

std::vector<VisitCounts> visit_counts(std::span<const StaypointRecord> staypoints, TimeWindow window, Period period,
                                      int n_agents) {
  std::vector<VisitCounts> out(static_cast<std::size_t>(std::max(n_agents, 0)));
  for (int i = 0; i < n_agents; ++i) out[static_cast<std::size_t>(i)] = {i, 0, 0, period};
  for (const auto& s : staypoints) {
    if (!window.contains(s.arrival)) continue;
    if (s.agent_id < 0 || s.agent_id >= n_agents) {
      throw DataIntegrityError("staypoint for unknown agent " + std::to_string(s.agent_id));
    }
    auto& c = out[static_cast<std::size_t>(s.agent_id)];
    if (s.venue_type == SiteKind::Restaurant) ++c.restaurant_visits;
    if (s.venue_type == SiteKind::Workplace) ++c.workplace_visits;
  }
  return out;
}

double jaccard(const std::set<SiteId>& train_sites, const std::set<SiteId>& test_sites) {
  if (train_sites.empty() && test_sites.empty()) return kJaccardBothEmpty;
  std::size_t common = 0;
  for (SiteId s : train_sites) common += test_sites.count(s);
  const std::size_t all = train_sites.size() + test_sites.size() - common;
  return static_cast<double>(common) / static_cast<double>(all);
}

std::vector<std::set<SiteId>> recreation_sites(std::span<const StaypointRecord> staypoints, int n_agents) {
  std::vector<std::set<SiteId>> out(static_cast<std::size_t>(std::max(n_agents, 0)));
  for (const auto& s : staypoints) {
    if (s.venue_type != SiteKind::Recreation) continue;
    if (s.agent_id < 0 || s.agent_id >= n_agents) {
      throw DataIntegrityError("staypoint for unknown agent " + std::to_string(s.agent_id));
    }
    out[static_cast<std::size_t>(s.agent_id)].insert(s.site_id);
  }
  return out;
}

double haversine_km(LatLon a, LatLon b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double avg_daily_distance(std::span<const TrajectoryRecord> trajectory, TimeWindow window) {
  if (window.ticks() <= 0) throw DataIntegrityError("empty window");
  Timestamp expected = window.start;
  const TrajectoryRecord* prev = nullptr;
  double km = 0.0;
  for (const auto& r : trajectory) {
    if (!window.contains(r.timestamp)) continue;
    if (r.timestamp != expected) {
      throw DataIntegrityError("trajectory of agent " + std::to_string(r.agent_id) + " has a gap at " +
                               to_iso8601(expected));
    }
    if (prev) km += haversine_km(prev->position, r.position);
    prev = &r;
    expected = expected + kTickMinutes;
  }
  if (expected != window.end) throw DataIntegrityError("trajectory ends before " + to_iso8601(window.end));
  return km / window.days();
}

Compartment compartment_at(const InfectionRecord& r, Timestamp t) {
  if (t < r.exposed_at) return Compartment::Susceptible;
  if (t < r.infectious_at) return Compartment::Exposed;
  if (t < r.recovered_at) return Compartment::Infectious;
  return Compartment::Recovered;
}

std::vector<EpiCurvePoint> epi_curve(std::span<const InfectionRecord> log, int population, TimeWindow range) {
  std::vector<EpiCurvePoint> out;
  for (Timestamp t = range.start; t <= range.end; t = t + kMinutesPerDay) {
    EpiCurvePoint p{t, population, 0, 0, 0};
    for (const auto& r : log) {
      switch (compartment_at(r, t)) {
        case Compartment::Susceptible: break;
        case Compartment::Exposed: --p.n_susceptible, ++p.n_exposed; break;
        case Compartment::Infectious: --p.n_susceptible, ++p.n_infectious; break;
        case Compartment::Recovered: --p.n_susceptible, ++p.n_recovered; break;
      }
    }
    out.push_back(p);
  }
  return out;
}

SeirSummary seir_summary(std::span<const InfectionRecord> log, Timestamp cutoff) {
  SeirSummary s;
  for (const auto& r : log) {
    if (r.cause.kind != InfectionCause::Kind::Seed && r.exposed_at <= cutoff) ++s.exposed;
    if (r.infectious_at <= cutoff) ++s.infectious;
    if (r.recovered_at <= cutoff) ++s.recovered;
  }
  return s;
}

std::vector<SpatialPoint> spatial_anomaly_map(std::span<const std::optional<LatLon>> homes,
                                              std::span<const LabelEntry> labels, LatLon source) {
  std::vector<SpatialPoint> out{{true, -1, source}};
  std::set<AgentId> seen;
  for (const auto& l : labels) seen.insert(l.agent_id);
  for (AgentId a : seen) {
    if (a < 0 || static_cast<std::size_t>(a) >= homes.size() || !homes[static_cast<std::size_t>(a)]) continue;
    out.push_back({false, a, *homes[static_cast<std::size_t>(a)]});
  }
  return out;
}

std::vector<std::optional<LatLon>> observed_homes(const Bundle& bundle) {
  std::vector<std::optional<LatLon>> out(static_cast<std::size_t>(bundle.meta.n_agents));
  for (const auto* split : {&bundle.train_staypoints, &bundle.test_staypoints}) {
    for (const auto& s : *split) {
      if (s.venue_type != SiteKind::Home) continue;
      auto& slot = out.at(static_cast<std::size_t>(s.agent_id));
      if (!slot) slot = s.position;
    }
  }
  return out;
}

namespace {

std::string visit_csv(const std::vector<VisitCounts>& counts) {
  std::string s = "agent_id,restaurant_visits,workplace_visits\n";
  for (const auto& c : counts) {
    s += std::to_string(c.agent_id) + ',' + std::to_string(c.restaurant_visits) + ',' +
         std::to_string(c.workplace_visits) + '\n';
  }
  return s;
}

}  // namespace

void write_report(const Bundle& b, const std::filesystem::path& report_dir) {
  std::filesystem::create_directories(report_dir);
  const int n = b.meta.n_agents;
  write_file(report_dir / "visit_counts_train.csv",
             visit_csv(visit_counts(b.train_staypoints, b.meta.train, Period::Train, n)));
  write_file(report_dir / "visit_counts_test.csv",
             visit_csv(visit_counts(b.test_staypoints, b.meta.test, Period::Test, n)));

  std::vector<std::string> label_of(static_cast<std::size_t>(n), kNormalLabel);
  for (const auto& l : b.labels) label_of.at(static_cast<std::size_t>(l.agent_id)) = l.label;
  const auto train_sites = recreation_sites(b.train_staypoints, n);
  const auto test_sites = recreation_sites(b.test_staypoints, n);
  std::string jac = "agent_id,label,jaccard\n";
  for (int a = 0; a < n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    jac += std::to_string(a) + ',' + label_of[i] + ',' + format_shortest(jaccard(train_sites[i], test_sites[i])) + '\n';
  }
  write_file(report_dir / "jaccard.csv", jac);

  if (b.meta.mechanism == Mechanism::Central) return;
  std::string epi = "day,timestamp,susceptible,exposed,infectious,recovered\n";
  int day = 0;
  for (const auto& p : epi_curve(b.meta.infection_log, n, b.meta.test)) {
    epi += std::to_string(day++) + ',' + to_iso8601(p.timestamp) + ',' + std::to_string(p.n_susceptible) + ',' +
           std::to_string(p.n_exposed) + ',' + std::to_string(p.n_infectious) + ',' + std::to_string(p.n_recovered) +
           '\n';
  }
  write_file(report_dir / "epi_curve.csv", epi);

  const SeirSummary s = seir_summary(b.meta.infection_log, b.meta.test.end);
  const nlohmann::json summary{{"exposed", s.exposed},
                               {"infectious", s.infectious},
                               {"recovered", s.recovered},
                               {"population", n},
                               {"cutoff", to_iso8601(b.meta.test.end)},
                               {"transmission_prob", b.meta.transmission_prob ? *b.meta.transmission_prob : 0.0},
                               {"anomaly_type", b.meta.anomaly_type}};
  write_file(report_dir / "seir_summary.json", summary.dump(1) + "\n");

  if (b.meta.mechanism != Mechanism::Location || !b.meta.source_location) return;
  const auto homes = observed_homes(b);
  std::string map = "kind,agent_id,latitude,longitude\n";
  for (const auto& p : spatial_anomaly_map(homes, b.labels, *b.meta.source_location)) {
    map += std::string(p.is_source ? "source" : "agent") + ',' + (p.is_source ? "" : std::to_string(p.agent_id)) +
           ',' + format_coord(p.position.lat) + ',' + format_coord(p.position.lon) + '\n';
  }
  write_file(report_dir / "spatial_map.csv", map);
}

}  // namespace uas
