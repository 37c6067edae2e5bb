#include "uas/emission.hpp"

#include <algorithm>

#include "uas/error.hpp"
#include "uas/textio.hpp"
#include "uas/zip.hpp"

namespace uas {

using nlohmann::json;

std::vector<TrajectoryRecord> emit_tick(std::span<const AgentState> agents, Timestamp clock, const WorldMap& world) {
  std::vector<TrajectoryRecord> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back({a.id, clock, world.to_wgs84(a.position)});
  return out;
}

StaypointRecord close_staypoint(AgentId agent, const Site& site, Timestamp arrival, Timestamp departure,
                                const WorldMap& world) {
  if (!(arrival < departure)) {
    throw InternalError("staypoint of agent " + std::to_string(agent) + " at site " + std::to_string(site.id) +
                        " has departure <= arrival");
  }
  return {agent, arrival, departure, site.kind, site.id, world.to_wgs84(site.position)};
}

std::vector<LabelEntry> build_labels(std::span<const ActiveAnomaly> anomalies, TimeWindow test) {
  std::vector<LabelEntry> out;
  for (const auto& a : anomalies) {
    const Timestamp start = std::max(a.start, test.start);
    const Timestamp end = std::min(a.end, test.end);
    if (!(start < end)) continue;
    out.push_back({a.agent_id, a.label, start, end});
  }
  std::sort(out.begin(), out.end(), [](const LabelEntry& x, const LabelEntry& y) {
    return std::tie(x.agent_id, x.start) < std::tie(y.agent_id, y.start);
  });
  return out;
}

std::string trajectory_row(const TrajectoryRecord& r) {
  return std::to_string(r.agent_id) + ',' + to_iso8601(r.timestamp) + ',' + format_coord(r.position.lat) + ',' +
         format_coord(r.position.lon);
}

std::string staypoint_row(const StaypointRecord& r) {
  return std::to_string(r.agent_id) + ',' + to_iso8601(r.arrival) + ',' + to_iso8601(r.departure) + ',' +
         std::string(to_string(r.venue_type)) + ',' + std::to_string(r.site_id) + ',' + format_coord(r.position.lat) +
         ',' + format_coord(r.position.lon);
}

std::string social_link_row(const SocialLinkRecord& r) {
  return std::to_string(r.agent_id) + ',' + std::to_string(r.friend_id) + ',' + to_iso8601(r.timestamp);
}

namespace {

json counts_json(const SplitCounts& c) {
  return {{"gps", c.gps}, {"staypoints", c.staypoints}, {"social_links", c.social_links}};
}

json infection_json(const InfectionRecord& r) {
  json j{{"agent_id", r.agent_id},
         {"cause", to_string(r.cause.kind)},
         {"exposed_at", to_iso8601(r.exposed_at)},
         {"infectious_at", to_iso8601(r.infectious_at)},
         {"recovered_at", to_iso8601(r.recovered_at)}};
  j["source_agent"] = r.cause.kind == InfectionCause::Kind::Contact ? json(r.cause.source_agent) : json(nullptr);
  j["source_site"] = r.cause.kind == InfectionCause::Kind::Seed ? json(nullptr) : json(r.cause.source_site);
  return j;
}

InfectionRecord infection_from(const json& j) {
  const auto kind = parse_cause_kind(j.at("cause").get<std::string>());
  if (!kind) throw ProcessingError("info.json: unknown infection cause");
  InfectionRecord r;
  r.agent_id = j.at("agent_id").get<AgentId>();
  r.cause.kind = *kind;
  if (!j.at("source_agent").is_null()) r.cause.source_agent = j.at("source_agent").get<AgentId>();
  if (!j.at("source_site").is_null()) r.cause.source_site = j.at("source_site").get<SiteId>();
  r.exposed_at = parse_iso8601(j.at("exposed_at").get<std::string>());
  r.infectious_at = parse_iso8601(j.at("infectious_at").get<std::string>());
  r.recovered_at = parse_iso8601(j.at("recovered_at").get<std::string>());
  return r;
}

SplitCounts counts_from(const json& j) {
  return {j.at("gps").get<std::int64_t>(), j.at("staypoints").get<std::int64_t>(),
          j.at("social_links").get<std::int64_t>()};
}

}  // namespace

json build_info(const ScenarioMeta& m) {
  json j;
  j["scenario"] = m.name;
  j["n_agents"] = m.n_agents;
  j["mechanism"] = to_string(m.mechanism);
  j["region"] = m.region;
  j["anomaly_type"] = m.anomaly_type;
  j["intensity_mix"] = {{"red", m.intensity_mix[0]}, {"orange", m.intensity_mix[1]}, {"yellow", m.intensity_mix[2]}};
  j["transmission_prob"] = m.transmission_prob ? json(*m.transmission_prob) : json(nullptr);
  if (m.selection) j["selection"] = *m.selection;
  j["seed"] = m.seed;
  j["train_start"] = to_iso8601(m.train.start);
  j["train_end"] = to_iso8601(m.train.end);
  j["test_start"] = to_iso8601(m.test.start);
  j["test_end"] = to_iso8601(m.test.end);
  j["train_counts"] = counts_json(m.train_counts);
  j["test_counts"] = counts_json(m.test_counts);
  if (m.source_site) {
    j["source_site"] = *m.source_site;
    j["source_latitude"] = m.source_location->lat;
    j["source_longitude"] = m.source_location->lon;
  }
  j["infection_log"] = json::array();
  for (const auto& r : m.infection_log) j["infection_log"].push_back(infection_json(r));
  return j;
}

ScenarioMeta parse_info(const json& j) {
  try {
    ScenarioMeta m;
    m.name = j.at("scenario").get<std::string>();
    m.n_agents = j.at("n_agents").get<int>();
    const auto mech = parse_mechanism(j.at("mechanism").get<std::string>());
    if (!mech) throw ProcessingError("info.json: unknown mechanism");
    m.mechanism = *mech;
    m.region = j.at("region").get<std::string>();
    m.anomaly_type = j.at("anomaly_type").get<std::string>();
    const auto& im = j.at("intensity_mix");
    m.intensity_mix = {im.at("red").get<double>(), im.at("orange").get<double>(), im.at("yellow").get<double>()};
    if (!j.at("transmission_prob").is_null()) m.transmission_prob = j.at("transmission_prob").get<double>();
    if (j.contains("selection")) m.selection = j.at("selection").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.train = {parse_iso8601(j.at("train_start").get<std::string>()),
               parse_iso8601(j.at("train_end").get<std::string>())};
    m.test = {parse_iso8601(j.at("test_start").get<std::string>()), parse_iso8601(j.at("test_end").get<std::string>())};
    m.train_counts = counts_from(j.at("train_counts"));
    m.test_counts = counts_from(j.at("test_counts"));
    if (j.contains("source_site")) {
      m.source_site = j.at("source_site").get<SiteId>();
      m.source_location = LatLon{j.at("source_latitude").get<double>(), j.at("source_longitude").get<double>()};
    }
    for (const auto& r : j.at("infection_log")) m.infection_log.push_back(infection_from(r));
    return m;
  } catch (const json::exception& e) {
    throw ProcessingError(std::string("info.json: ") + e.what());
  } catch (const ConfigError& e) {
    throw ProcessingError(std::string("info.json: ") + e.what());
  }
}

json labels_json(std::span<const LabelEntry> labels) {
  json arr = json::array();
  for (const auto& l : labels) {
    arr.push_back({{"agent_id", l.agent_id}, {"label", l.label}, {"start", to_iso8601(l.start)},
                   {"end", to_iso8601(l.end)}});
  }
  return arr;
}

std::vector<LabelEntry> parse_labels(const json& j) {
  try {
    if (!j.is_array()) throw ProcessingError("labels.json: expected an array");
    std::vector<LabelEntry> out;
    for (const auto& e : j) {
      out.push_back({e.at("agent_id").get<AgentId>(), e.at("label").get<std::string>(),
                     parse_iso8601(e.at("start").get<std::string>()), parse_iso8601(e.at("end").get<std::string>())});
    }
    return out;
  } catch (const json::exception& e) {
    throw ProcessingError(std::string("labels.json: ") + e.what());
  } catch (const ConfigError& e) {
    throw ProcessingError(std::string("labels.json: ") + e.what());
  }
}

namespace {

constexpr std::size_t kFlushBytes = 1 << 22;

class EntryBuffer {
 public:
  explicit EntryBuffer(ZipWriter& zip) : zip_(zip) {}
  void line(std::string_view text) {
    buf_ += text;
    buf_ += '\n';
    if (buf_.size() >= kFlushBytes) flush();
  }
  std::string& raw() { return buf_; }
  void maybe_flush() {
    if (buf_.size() >= kFlushBytes) flush();
  }
  void flush() {
    zip_.write(buf_);
    buf_.clear();
  }

 private:
  ZipWriter& zip_;
  std::string buf_;
};

/// Replays the sparse position log tick by tick.
class TrajectoryReplay {
 public:
  TrajectoryReplay(const RunOutput& run, const WorldMap& world)
      : run_(run), world_(world), prefix_(run.homes.size()), suffix_(run.homes.size()) {
    for (std::size_t i = 0; i < prefix_.size(); ++i) prefix_[i] = std::to_string(i) + ',';
  }

  /// Writes every tick in [first_tick, last_tick) and returns the row count.
  std::int64_t write(EntryBuffer& out, std::int32_t first_tick, std::int32_t last_tick, Timestamp train_start) {
    std::int64_t rows = 0;
    for (std::int32_t t = first_tick; t < last_tick; ++t) {
      while (cursor_ < run_.positions.size() && run_.positions[cursor_].tick <= t) {
        const auto& p = run_.positions[cursor_++];
        if (p.tick < t) throw InternalError("position log is not tick-ordered");
        const LatLon ll = world_.to_wgs84(p.position);
        suffix_.at(static_cast<std::size_t>(p.agent_id)) =
            ',' + format_coord(ll.lat) + ',' + format_coord(ll.lon) + '\n';
      }
      const std::string ts = to_iso8601(train_start + static_cast<std::int64_t>(t) * kTickMinutes);
      for (std::size_t a = 0; a < prefix_.size(); ++a) {
        if (suffix_[a].empty()) {
          throw ProcessingError("position log has no fix for agent " + std::to_string(a) + " at tick " +
                                std::to_string(t));
        }
        auto& buf = out.raw();
        buf += prefix_[a];
        buf += ts;
        buf += suffix_[a];
      }
      rows += static_cast<std::int64_t>(prefix_.size());
      out.maybe_flush();
    }
    return rows;
  }

 private:
  const RunOutput& run_;
  const WorldMap& world_;
  std::vector<std::string> prefix_;
  std::vector<std::string> suffix_;
  std::size_t cursor_ = 0;
};

}  // namespace

ScenarioMeta split_and_write(const RunOutput& run, const WorldMap& world, const std::filesystem::path& scenario_dir) {
  const ScenarioConfig& cfg = run.config;
  const TimeWindow train = cfg.train_window();
  const TimeWindow test = cfg.test_window();

  ScenarioMeta meta;
  meta.name = cfg.name;
  meta.n_agents = cfg.n_agents;
  meta.train = train;
  meta.test = test;
  meta.mechanism = cfg.mechanism;
  meta.region = cfg.region();
  meta.anomaly_type = type_mix_name(cfg.anomaly_type);
  meta.intensity_mix = cfg.intensity_mix;
  if (cfg.mechanism == Mechanism::Infectious) meta.transmission_prob = cfg.epidemic.transmission_prob;
  if (cfg.mechanism == Mechanism::Location) {
    meta.transmission_prob = cfg.location.transmission_prob;
    meta.selection = std::string(to_string(cfg.location.selection));
  }
  meta.seed = cfg.seed;
  if (run.source_site) {
    meta.source_site = run.source_site;
    meta.source_location = world.to_wgs84(world.site(*run.source_site).position);
  }
  meta.infection_log = run.infections;

  std::vector<StaypointRecord> stays;
  stays.reserve(run.stays.size());
  for (const auto& s : run.stays) {
    if (s.arrival < train.start || !(s.arrival < test.end)) continue;
    stays.push_back(close_staypoint(s.agent_id, world.site(s.site_id), s.arrival, s.departure, world));
  }
  std::sort(stays.begin(), stays.end(), [](const StaypointRecord& a, const StaypointRecord& b) {
    return std::tie(a.agent_id, a.arrival) < std::tie(b.agent_id, b.arrival);
  });

  std::filesystem::create_directories(scenario_dir);
  TrajectoryReplay replay(run, world);
  const auto train_ticks = static_cast<std::int32_t>(train.ticks());
  const auto test_ticks = static_cast<std::int32_t>(test.ticks());

  const auto write_split = [&](const char* zip_name, TimeWindow window, std::int32_t first, std::int32_t last,
                               SplitCounts& counts) {
    ZipWriter zip(scenario_dir / zip_name);
    EntryBuffer buf(zip);

    zip.begin_entry(kTrajectoryFile);
    buf.line(kTrajectoryHeader);
    counts.gps = replay.write(buf, first, last, train.start);
    buf.flush();
    zip.end_entry();

    zip.begin_entry(kStaypointFile);
    buf.line(kStaypointHeader);
    for (const auto& s : stays) {
      if (!window.contains(s.arrival)) continue;
      buf.line(staypoint_row(s));
      ++counts.staypoints;
    }
    buf.flush();
    zip.end_entry();

    zip.begin_entry(kSocialLinkFile);
    buf.line(kSocialLinkHeader);
    for (const auto& l : run.links) {
      // The train file also carries the friendships formed during warm-up.
      const bool in_split = window.start == train.start ? l.time < train.end : window.contains(l.time);
      if (!in_split) continue;
      buf.line(social_link_row({l.agent_id, l.friend_id, l.time}));
      ++counts.social_links;
    }
    buf.flush();
    zip.end_entry();
    zip.close();
  };

  write_split("train.zip", train, 0, train_ticks, meta.train_counts);
  write_split("test.zip", test, train_ticks, train_ticks + test_ticks, meta.test_counts);

  const auto labels = build_labels(run.anomalies, test);
  write_file(scenario_dir / "labels.json", labels_json(labels).dump(1) + "\n");
  write_file(scenario_dir / "info.json", build_info(meta).dump(1) + "\n");
  return meta;
}

namespace {

void expect_header(const std::filesystem::path& zip, const char* entry, std::string_view header,
                   std::string_view got) {
  if (got != header) {
    throw ProcessingError(zip.string() + ":" + entry + ": unexpected header '" + std::string(got) + "'");
  }
}

template <typename Fn>
void read_entry(const ZipReader& zip, const std::filesystem::path& path, const char* entry, std::string_view header,
                std::size_t fields, Fn&& fn) {
  if (!zip.contains(entry)) throw ProcessingError(path.string() + ": missing " + entry);
  bool first = true;
  std::size_t line_no = 0;
  zip.for_each_line(entry, [&](std::string_view line) {
    ++line_no;
    if (first) {
      first = false;
      expect_header(path, entry, header, line);
      return;
    }
    const auto f = split_fields(line);
    if (f.size() != fields) {
      throw ProcessingError(path.string() + ":" + entry + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(fields) + " fields");
    }
    try {
      fn(f);
    } catch (const DataIntegrityError& e) {
      throw ProcessingError(path.string() + ":" + entry + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ProcessingError(path.string() + ":" + entry + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  if (first) throw ProcessingError(path.string() + ":" + entry + ": empty file");
}

void read_split(const std::filesystem::path& path, std::vector<StaypointRecord>& stays,
                std::vector<SocialLinkRecord>& links) {
  if (!std::filesystem::exists(path)) throw ProcessingError("missing " + path.string());
  ZipReader zip(path);
  read_entry(zip, path, kStaypointFile, kStaypointHeader, 7, [&](const auto& f) {
    const auto kind = parse_site_kind(f[3]);
    if (!kind) throw DataIntegrityError("unknown venue_type '" + std::string(f[3]) + "'");
    stays.push_back({parse_number<AgentId>(f[0], "agent_id"), parse_iso8601(f[1]), parse_iso8601(f[2]), *kind,
                     parse_number<SiteId>(f[4], "site_id"),
                     LatLon{parse_number<double>(f[5], "latitude"), parse_number<double>(f[6], "longitude")}});
  });
  read_entry(zip, path, kSocialLinkFile, kSocialLinkHeader, 3, [&](const auto& f) {
    links.push_back(
        {parse_number<AgentId>(f[0], "agent_id"), parse_number<AgentId>(f[1], "friend_id"), parse_iso8601(f[2])});
  });
}

}  // namespace

Bundle load_bundle(const std::filesystem::path& scenario_dir) {
  Bundle b;
  b.dir = scenario_dir;
  const auto info_path = scenario_dir / "info.json";
  const auto labels_path = scenario_dir / "labels.json";
  for (const auto& p : {info_path, labels_path}) {
    if (!std::filesystem::exists(p)) throw ProcessingError("missing " + p.string());
  }
  try {
    b.meta = parse_info(json::parse(read_file(info_path)));
    b.labels = parse_labels(json::parse(read_file(labels_path)));
  } catch (const json::parse_error& e) {
    throw ProcessingError(scenario_dir.string() + ": invalid JSON: " + e.what());
  }
  read_split(scenario_dir / "train.zip", b.train_staypoints, b.train_links);
  read_split(scenario_dir / "test.zip", b.test_staypoints, b.test_links);
  return b;
}

void for_each_trajectory(const std::filesystem::path& zip_path,
                         const std::function<void(const TrajectoryRecord&)>& on_record) {
  ZipReader zip(zip_path);
  read_entry(zip, zip_path, kTrajectoryFile, kTrajectoryHeader, 4, [&](const auto& f) {
    on_record({parse_number<AgentId>(f[0], "agent_id"), parse_iso8601(f[1]),
               LatLon{parse_number<double>(f[2], "latitude"), parse_number<double>(f[3], "longitude")}});
  });
}

}  // namespace uas
