#include "uas/scenario.hpp"

#include <fstream>
#include <sstream>

#include "uas/error.hpp"

namespace uas {

using nlohmann::json;

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Central: return "central";
    case Mechanism::Infectious: return "infectious";
    case Mechanism::Location: return "location";
  }
  return "?";
}

std::optional<Mechanism> parse_mechanism(std::string_view text) {
  for (auto m : {Mechanism::Central, Mechanism::Infectious, Mechanism::Location}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string_view to_string(SeirSites s) {
  return s == SeirSites::AllShared ? "all_shared" : "points_of_interest";
}

std::optional<SeirSites> parse_seir_sites(std::string_view text) {
  if (text == "all_shared") return SeirSites::AllShared;
  if (text == "points_of_interest") return SeirSites::PointsOfInterest;
  return std::nullopt;
}

std::string type_mix_name(const TypeMix& mix) {
  return mix.fixed ? std::string(to_string(*mix.fixed)) : "combined";
}

std::optional<TypeMix> parse_type_mix(std::string_view text) {
  if (text == "combined") return TypeMix{};
  if (auto t = parse_anomaly_type(text)) return TypeMix{*t};
  return std::nullopt;
}

TimeWindow ScenarioConfig::warmup_window() const {
  return {epoch, epoch + static_cast<std::int64_t>(warmup_days) * kMinutesPerDay};
}

TimeWindow ScenarioConfig::train_window() const {
  const Timestamp start = warmup_window().end;
  return {start, start + static_cast<std::int64_t>(train_days) * kMinutesPerDay};
}

TimeWindow ScenarioConfig::test_window() const {
  const Timestamp start = train_window().end;
  return {start, start + static_cast<std::int64_t>(test_days) * kMinutesPerDay};
}

std::string ScenarioConfig::region() const {
  if (!map_path) return synthetic.region;
  return std::filesystem::path(*map_path).stem().string();
}

std::filesystem::path ScenarioConfig::relative_dir() const {
  return std::filesystem::path(std::string(to_string(mechanism))) / (region() + "_" + name);
}

namespace {

bool safe_name(std::string_view s) {
  if (s.empty() || s == "." || s == "..") return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!safe_name(name)) throw ConfigError("name must be non-empty and use only [A-Za-z0-9_.-]: '" + name + "'");
  if (!map_path && !safe_name(synthetic.region)) throw ConfigError("synthetic region name is not a safe file name");
  if (n_agents < 1) throw ConfigError("n_agents must be >= 1");
  if (warmup_days < 0) throw ConfigError("warmup_days must be >= 0");
  if (train_days < 1 || test_days < 1) throw ConfigError("train_days and test_days must be > 0");
  if (minute_of_day(epoch) != 0) throw ConfigError("epoch must be a midnight");
  double total = 0.0;
  for (double w : intensity_mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("intensity_mix weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("intensity_mix needs a positive weight");
  switch (mechanism) {
    case Mechanism::Central:
      if (n_central < 0 || n_central > n_agents) {
        throw ConfigError("n_central must be in [0, n_agents]");
      }
      break;
    case Mechanism::Infectious:
      epidemic.validate();
      if (epidemic.initial_infected > n_agents) throw ConfigError("epidemic: initial_infected exceeds n_agents");
      break;
    case Mechanism::Location: location.validate(); break;
  }
  needs.validate();
  schedule.validate();
}

ScenarioConfig default_config(Mechanism m) {
  ScenarioConfig c;
  c.mechanism = m;
  c.test_days = m == Mechanism::Central ? 28 : 84;
  return c;
}

namespace {

json range_json(const DayRange& r) { return json::array({r.min_days, r.max_days}); }

DayRange range_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(key) + " must be [min_days, max_days]");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

const json& object_at(const json& obj, const char* key) {
  static const json empty = json::object();
  auto it = obj.find(key);
  if (it == obj.end()) return empty;
  if (!it->is_object()) throw ConfigError(std::string(key) + " must be an object");
  return *it;
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["mechanism"] = to_string(c.mechanism);
  if (c.map_path) {
    j["map_path"] = *c.map_path;
  }
  const auto& s = c.synthetic;
  j["synthetic_map"] = {{"rows", s.rows},
                        {"cols", s.cols},
                        {"block_m", s.block_m},
                        {"homes", s.homes},
                        {"workplaces", s.workplaces},
                        {"restaurants", s.restaurants},
                        {"recreation", s.recreation},
                        {"interest_groups", s.interest_groups},
                        {"seed", s.seed},
                        {"anchor_lat", s.anchor.lat},
                        {"anchor_lon", s.anchor.lon},
                        {"region", s.region}};
  j["n_agents"] = c.n_agents;
  j["seed"] = c.seed;
  j["epoch"] = to_iso8601(c.epoch);
  j["warmup_days"] = c.warmup_days;
  j["train_days"] = c.train_days;
  j["test_days"] = c.test_days;
  j["anomaly_type"] = type_mix_name(c.anomaly_type);
  j["intensity_mix"] = {{"red", c.intensity_mix[0]}, {"orange", c.intensity_mix[1]}, {"yellow", c.intensity_mix[2]}};
  j["n_central"] = c.n_central;
  j["epidemic"] = {{"initial_infected", c.epidemic.initial_infected},
                   {"transmission_prob", c.epidemic.transmission_prob},
                   {"exposed_days", range_json(c.epidemic.exposed_days)},
                   {"infectious_days", range_json(c.epidemic.infectious_days)}};
  j["location"] = {{"selection", to_string(c.location.selection)},
                   {"transmission_prob", c.location.transmission_prob},
                   {"exposed_days", range_json(c.location.exposed_days)},
                   {"active_days", range_json(c.location.active_days)}};
  j["seir_sites"] = to_string(c.seir_sites);
  const auto& n = c.needs;
  j["needs"] = {{"time_to_hunger_min", n.time_to_hunger_min},
                {"hunger_rate", n.hunger_rate},
                {"hunger_critical", n.hunger_critical},
                {"meal_duration_min", n.meal_duration_min},
                {"social_need_rate", n.social_need_rate},
                {"social_critical", n.social_critical},
                {"recreation_duration_min", n.recreation_duration_min}};
  const auto& sc = c.schedule;
  j["schedule"] = {{"work_start", sc.work_start},
                   {"work_end", sc.work_end},
                   {"wake_time", sc.wake_time},
                   {"sleep_time", sc.sleep_time},
                   {"workdays", sc.workdays}};
  j["out_dir"] = c.out_dir;
  return j;
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  try {
    const std::string mech = j.value("mechanism", std::string("central"));
    const auto m = parse_mechanism(mech);
    if (!m) throw ConfigError("unknown mechanism '" + mech + "'");
    ScenarioConfig c = default_config(*m);
    read(j, "name", c.name);
    if (auto it = j.find("map_path"); it != j.end() && !it->is_null()) c.map_path = it->get<std::string>();
    const json& s = object_at(j, "synthetic_map");
    read(s, "rows", c.synthetic.rows);
    read(s, "cols", c.synthetic.cols);
    read(s, "block_m", c.synthetic.block_m);
    read(s, "homes", c.synthetic.homes);
    read(s, "workplaces", c.synthetic.workplaces);
    read(s, "restaurants", c.synthetic.restaurants);
    read(s, "recreation", c.synthetic.recreation);
    read(s, "interest_groups", c.synthetic.interest_groups);
    read(s, "seed", c.synthetic.seed);
    read(s, "anchor_lat", c.synthetic.anchor.lat);
    read(s, "anchor_lon", c.synthetic.anchor.lon);
    read(s, "region", c.synthetic.region);
    read(j, "n_agents", c.n_agents);
    read(j, "seed", c.seed);
    if (auto it = j.find("epoch"); it != j.end()) c.epoch = parse_iso8601(it->get<std::string>());
    read(j, "warmup_days", c.warmup_days);
    read(j, "train_days", c.train_days);
    read(j, "test_days", c.test_days);
    if (auto it = j.find("anomaly_type"); it != j.end()) {
      const auto text = it->get<std::string>();
      const auto mix = parse_type_mix(text);
      if (!mix) throw ConfigError("unknown anomaly_type '" + text + "'");
      c.anomaly_type = *mix;
    }
    const json& im = object_at(j, "intensity_mix");
    read(im, "red", c.intensity_mix[0]);
    read(im, "orange", c.intensity_mix[1]);
    read(im, "yellow", c.intensity_mix[2]);
    read(j, "n_central", c.n_central);
    const json& e = object_at(j, "epidemic");
    read(e, "initial_infected", c.epidemic.initial_infected);
    read(e, "transmission_prob", c.epidemic.transmission_prob);
    if (e.contains("exposed_days")) c.epidemic.exposed_days = range_from(e["exposed_days"], "exposed_days");
    if (e.contains("infectious_days")) c.epidemic.infectious_days = range_from(e["infectious_days"], "infectious_days");
    const json& l = object_at(j, "location");
    if (auto it = l.find("selection"); it != l.end()) {
      const auto text = it->get<std::string>();
      const auto sel = parse_source_selection(text);
      if (!sel) throw ConfigError("unknown location selection '" + text + "'");
      c.location.selection = *sel;
    }
    read(l, "transmission_prob", c.location.transmission_prob);
    if (l.contains("exposed_days")) c.location.exposed_days = range_from(l["exposed_days"], "exposed_days");
    if (l.contains("active_days")) c.location.active_days = range_from(l["active_days"], "active_days");
    if (auto it = j.find("seir_sites"); it != j.end()) {
      const auto text = it->get<std::string>();
      const auto ss = parse_seir_sites(text);
      if (!ss) throw ConfigError("unknown seir_sites '" + text + "'");
      c.seir_sites = *ss;
    }
    const json& n = object_at(j, "needs");
    read(n, "time_to_hunger_min", c.needs.time_to_hunger_min);
    read(n, "hunger_rate", c.needs.hunger_rate);
    read(n, "hunger_critical", c.needs.hunger_critical);
    read(n, "meal_duration_min", c.needs.meal_duration_min);
    read(n, "social_need_rate", c.needs.social_need_rate);
    read(n, "social_critical", c.needs.social_critical);
    read(n, "recreation_duration_min", c.needs.recreation_duration_min);
    const json& sc = object_at(j, "schedule");
    read(sc, "work_start", c.schedule.work_start);
    read(sc, "work_end", c.schedule.work_end);
    read(sc, "wake_time", c.schedule.wake_time);
    read(sc, "sleep_time", c.schedule.sleep_time);
    read(sc, "workdays", c.schedule.workdays);
    read(j, "out_dir", c.out_dir);
    c.validate();
    return c;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("scenario config: ") + ex.what());
  }
}

std::string serialize_config(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

ScenarioConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("scenario config is not valid JSON: ") + ex.what());
  }
  return config_from_json(j);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_config(const ScenarioConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_config(c);
  if (!out) throw IoError("write failed: " + path.string());
}

WorldMap build_world(const ScenarioConfig& c) {
  if (c.map_path) return load_map(*c.map_path);
  return generate_synthetic_map(c.synthetic);
}

}  // namespace uas
