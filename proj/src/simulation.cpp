#include "uas/simulation.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "uas/error.hpp"
#include "uas/textio.hpp"

namespace uas {
namespace {

// splitmix64 finaliser; gives independent-looking streams from one seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool seir_site(SiteKind kind, SeirSites mode) {
  if (mode == SeirSites::PointsOfInterest) return kind == SiteKind::Restaurant || kind == SiteKind::Recreation;
  return kind != SiteKind::Home;
}

}  // namespace

Simulation::Simulation(ScenarioConfig config, const WorldMap& world)
    : config_(std::move(config)),
      world_(world),
      train_(config_.train_window()),
      test_(config_.test_window()),
      now_(config_.epoch),
      end_(test_.end),
      behavior_rng_(stream_seed(config_.seed, 1)),
      injection_rng_(stream_seed(config_.seed, 2)) {
  config_.validate();
  Rng population_rng(stream_seed(config_.seed, 0));
  agents_ = initialize_population(world_, config_.n_agents, config_.needs, config_.epoch, population_rng);
  last_emitted_.resize(agents_.size());
  occupants_.resize(world_.sites().size());
  for (std::size_t i = 0; i < world_.sites().size(); ++i) site_slot_.emplace(world_.sites()[i].id, i);
  out_.config = config_;
  out_.homes.reserve(agents_.size());
  for (const auto& a : agents_) out_.homes.push_back(a.home);
  if (config_.mechanism != Mechanism::Central) epidemic_ = std::make_unique<Epidemic>(agents_.size());
}

Simulation::~Simulation() = default;

void Simulation::activate(const ActiveAnomaly& anomaly) {
  AgentState& a = agents_.at(static_cast<std::size_t>(anomaly.agent_id));
  activate_profile(a, profile_for(anomaly.type, anomaly.intensity));
  if (anomaly.type == AnomalyType::Interest) {
    a.params.interest_group = switch_interest_group(a.params.interest_group, world_.interest_group_count(),
                                                    injection_rng_);
    interest_active_[a.id] = now_;
  }
  out_.anomalies.push_back(anomaly);
}

void Simulation::start_test_phase() {
  switch (config_.mechanism) {
    case Mechanism::Central: {
      const auto selected =
          select_central(agents_.size(), static_cast<std::size_t>(config_.n_central), config_.anomaly_type,
                         config_.intensity_mix, test_.start, test_.end, injection_rng_);
      for (const auto& an : selected) activate(an);
      break;
    }
    case Mechanism::Infectious: {
      for (const auto& rec : seed_epidemic(*epidemic_, config_.epidemic, test_.start, injection_rng_)) {
        const AnomalyType type = draw_type(config_.anomaly_type, injection_rng_);
        const Intensity intensity = draw_intensity(config_.intensity_mix, injection_rng_);
        activate(activate_behavior(rec, type, intensity));
      }
      break;
    }
    case Mechanism::Location: {
      std::vector<StayRecord> train_stays;
      for (const auto& s : out_.stays) {
        if (train_.contains(s.arrival)) train_stays.push_back(s);
      }
      const SiteId site =
          select_source_site(world_, agents_, config_.location.selection, train_stays, injection_rng_);
      source_.emplace(site);
      out_.source_site = site;
      break;
    }
  }
}

void Simulation::handle_transitions(const std::vector<Transition>& transitions) {
  for (const auto& tr : transitions) {
    AgentState& a = agents_.at(static_cast<std::size_t>(tr.agent_id));
    if (tr.to == Compartment::Infectious) {
      const auto& rec = epidemic_->records()[*epidemic_->record_of(tr.agent_id)];
      const AnomalyType type = draw_type(config_.anomaly_type, injection_rng_);
      const Intensity intensity = draw_intensity(config_.intensity_mix, injection_rng_);
      activate(activate_behavior(rec, type, intensity));
    } else if (tr.to == Compartment::Recovered) {
      deactivate(a);
      interest_active_.erase(a.id);
    }
  }
}

void Simulation::record_positions() {
  if (now_ < train_.start || now_ >= test_.end) return;
  const auto tick = static_cast<std::int32_t>((now_ - train_.start) / kTickMinutes);
  for (const auto& a : agents_) {
    auto& last = last_emitted_[static_cast<std::size_t>(a.id)];
    if (last && *last == a.position) continue;
    last = a.position;
    out_.positions.push_back(PositionSample{tick, a.id, a.position});
  }
}

void Simulation::resolve_copresence() {
  for (auto& v : occupants_) v.clear();
  for (auto& a : agents_) {
    if (a.traveling() || a.stay_arrival > now_) continue;
    occupants_[site_slot_.at(a.site)].push_back(&a);
  }
  const bool in_test = test_.contains(now_);
  std::vector<ContactPair> contacts;
  std::vector<AgentState*> recreating;
  for (std::size_t i = 0; i < occupants_.size(); ++i) {
    const auto& here = occupants_[i];
    if (here.empty()) continue;
    const Site& site = world_.sites()[i];
    if (site.kind == SiteKind::Recreation && here.size() > 1) {
      recreating.clear();
      for (AgentState* a : here) {
        if (a->activity == Activity::Recreating) recreating.push_back(a);
      }
      if (recreating.size() > 1) {
        auto links = colocation_update(recreating, site.id, now_);
        out_.links.insert(out_.links.end(), links.begin(), links.end());
      }
    }
    if (in_test && config_.mechanism == Mechanism::Infectious && here.size() > 1 &&
        seir_site(site.kind, config_.seir_sites)) {
      for (AgentState* s : here) {
        if (epidemic_->state(s->id).compartment != Compartment::Susceptible) continue;
        for (AgentState* inf : here) {
          if (epidemic_->state(inf->id).compartment == Compartment::Infectious) {
            contacts.push_back({s->id, inf->id, site.id});
          }
        }
      }
    }
  }
  if (!in_test || !epidemic_) return;
  if (config_.mechanism == Mechanism::Infectious) {
    seir_tick(*epidemic_, contacts, config_.epidemic, now_, injection_rng_);
  } else if (source_) {
    std::vector<SourceVisit> visitors;
    for (AgentState* a : occupants_[site_slot_.at(source_->site())]) {
      visitors.push_back({a->id, std::max(a->stay_arrival, test_.start)});
    }
    location_tick(*source_, visitors, *epidemic_, config_.location, now_, injection_rng_);
  }
  out_.stats.census.push_back(epidemic_->census());
}

void Simulation::step() {
  if (done()) throw InternalError("step past the end of the run");
  record_positions();
  if (now_ == test_.start) start_test_phase();
  if (epidemic_ && test_.contains(now_)) handle_transitions(epidemic_->advance(now_));
  if (minute_of_day(now_) == 0) {
    for (const auto& [id, activated] : interest_active_) {
      AgentState& a = agents_[static_cast<std::size_t>(id)];
      if (is_interest_switch_midnight(now_, activated, a.params.interest_change_period_days)) {
        a.params.interest_group =
            switch_interest_group(a.params.interest_group, world_.interest_group_count(), injection_rng_);
      }
    }
  }

  const TickContext ctx{world_, config_.needs, config_.schedule, now_};
  const bool in_test = test_.contains(now_);
  for (auto& a : agents_) {
    TickEvents ev = tick(a, ctx, behavior_rng_);
    if (ev.closed_stay && ev.closed_stay->arrival >= train_.start) out_.stays.push_back(*ev.closed_stay);
    if (ev.work_decision && in_test) out_.stats.work_decisions.push_back(*ev.work_decision);
  }
  resolve_copresence();
  now_ = now_ + kTickMinutes;
}

void Simulation::run_to_end() {
  while (!done()) step();
}

RunOutput Simulation::finish() {
  run_to_end();
  for (const auto& a : agents_) {
    if (a.traveling() || a.stay_arrival < train_.start || !(a.stay_arrival < end_)) continue;
    out_.stays.push_back({a.id, a.site, world_.site(a.site).kind, a.stay_arrival, end_});
  }
  if (epidemic_) out_.infections = epidemic_->records();
  return std::move(out_);
}

RunOutput run_simulation(const ScenarioConfig& config, const WorldMap& world) {
  Simulation sim(config, world);
  return sim.finish();
}

// Raw run directory ---------------------------------------------------------

namespace {

using nlohmann::json;

json anomaly_json(const ActiveAnomaly& a) {
  return {{"agent_id", a.agent_id},
          {"type", to_string(a.type)},
          {"intensity", to_string(a.intensity)},
          {"start", a.start.minutes},
          {"end", a.end.minutes}};
}

json infection_json(const InfectionRecord& r) {
  return {{"agent_id", r.agent_id},
          {"cause", to_string(r.cause.kind)},
          {"source_agent", r.cause.source_agent},
          {"source_site", r.cause.source_site},
          {"exposed_at", r.exposed_at.minutes},
          {"infectious_at", r.infectious_at.minutes},
          {"recovered_at", r.recovered_at.minutes}};
}

std::filesystem::path require(const std::filesystem::path& dir, const char* name) {
  auto p = dir / name;
  if (!std::filesystem::exists(p)) throw ProcessingError("raw run " + dir.string() + " is missing " + name);
  return p;
}

template <typename Fn>
void read_rows(const std::filesystem::path& path, std::size_t fields, Fn&& fn) {
  bool header = true;
  std::size_t line_no = 0;
  for_each_file_line(path, [&](std::string_view line) {
    ++line_no;
    if (header) {
      header = false;
      return;
    }
    if (line.empty()) return;
    const auto f = split_fields(line);
    if (f.size() != fields) {
      throw ProcessingError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(fields) +
                            " fields");
    }
    try {
      fn(f);
    } catch (const DataIntegrityError& e) {
      throw ProcessingError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
}

}  // namespace

void write_raw(const RunOutput& run, const WorldMap& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "config.json", serialize_config(run.config));
  write_file(dir / "map.json", serialize_map(world));

  std::string buf = "tick,agent_id,x,y\n";
  for (const auto& p : run.positions) {
    buf += std::to_string(p.tick);
    buf += ',';
    buf += std::to_string(p.agent_id);
    buf += ',';
    buf += format_shortest(p.position.x);
    buf += ',';
    buf += format_shortest(p.position.y);
    buf += '\n';
  }
  write_file(dir / "positions.csv", buf);

  buf = "agent_id,site_id,arrival,departure\n";
  for (const auto& s : run.stays) {
    buf += std::to_string(s.agent_id) + ',' + std::to_string(s.site_id) + ',' + std::to_string(s.arrival.minutes) +
           ',' + std::to_string(s.departure.minutes) + '\n';
  }
  write_file(dir / "stays.csv", buf);

  buf = "agent_id,friend_id,time\n";
  for (const auto& l : run.links) {
    buf += std::to_string(l.agent_id) + ',' + std::to_string(l.friend_id) + ',' + std::to_string(l.time.minutes) +
           '\n';
  }
  write_file(dir / "links.csv", buf);

  json inj;
  inj["homes"] = run.homes;
  inj["anomalies"] = json::array();
  for (const auto& a : run.anomalies) inj["anomalies"].push_back(anomaly_json(a));
  inj["infections"] = json::array();
  for (const auto& r : run.infections) inj["infections"].push_back(infection_json(r));
  inj["source_site"] = run.source_site ? json(*run.source_site) : json(nullptr);
  write_file(dir / "injection.json", inj.dump(1) + "\n");
}

RawRun read_raw(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ProcessingError("raw run directory not found: " + dir.string());
  RawRun raw;
  RunOutput& out = raw.output;
  try {
    out.config = load_config(require(dir, "config.json"));
  } catch (const ConfigError& e) {
    throw ProcessingError(e.what());
  }
  try {
    raw.world = std::make_unique<WorldMap>(load_map(require(dir, "map.json")));
  } catch (const LoadError& e) {
    throw ProcessingError(dir.string() + "/map.json: " + e.what());
  }
  const WorldMap& world = *raw.world;

  read_rows(require(dir, "positions.csv"), 4, [&](const auto& f) {
    out.positions.push_back({parse_number<std::int32_t>(f[0], "tick"), parse_number<AgentId>(f[1], "agent_id"),
                             Point{parse_number<double>(f[2], "x"), parse_number<double>(f[3], "y")}});
  });
  read_rows(require(dir, "stays.csv"), 4, [&](const auto& f) {
    const auto site = parse_number<SiteId>(f[1], "site_id");
    if (!world.has_site(site)) throw DataIntegrityError("unknown site " + std::to_string(site));
    out.stays.push_back({parse_number<AgentId>(f[0], "agent_id"), site, world.site(site).kind,
                         Timestamp{parse_number<std::int64_t>(f[2], "arrival")},
                         Timestamp{parse_number<std::int64_t>(f[3], "departure")}});
  });
  read_rows(require(dir, "links.csv"), 3, [&](const auto& f) {
    out.links.push_back({parse_number<AgentId>(f[0], "agent_id"), parse_number<AgentId>(f[1], "friend_id"),
                         Timestamp{parse_number<std::int64_t>(f[2], "time")}});
  });

  const auto inj_path = require(dir, "injection.json");
  try {
    const json inj = json::parse(read_file(inj_path));
    out.homes = inj.at("homes").get<std::vector<SiteId>>();
    for (const auto& a : inj.at("anomalies")) {
      const auto type = parse_anomaly_type(a.at("type").get<std::string>());
      const auto intensity = parse_intensity(a.at("intensity").get<std::string>());
      if (!type || !intensity) throw ProcessingError(inj_path.string() + ": bad anomaly type or intensity");
      out.anomalies.push_back(ActiveAnomaly::make(a.at("agent_id").get<AgentId>(), *type, *intensity,
                                                  Timestamp{a.at("start").get<std::int64_t>()},
                                                  Timestamp{a.at("end").get<std::int64_t>()}));
    }
    for (const auto& r : inj.at("infections")) {
      const auto kind = parse_cause_kind(r.at("cause").get<std::string>());
      if (!kind) throw ProcessingError(inj_path.string() + ": bad infection cause");
      out.infections.push_back({r.at("agent_id").get<AgentId>(),
                                {*kind, r.at("source_agent").get<AgentId>(), r.at("source_site").get<SiteId>()},
                                Timestamp{r.at("exposed_at").get<std::int64_t>()},
                                Timestamp{r.at("infectious_at").get<std::int64_t>()},
                                Timestamp{r.at("recovered_at").get<std::int64_t>()}});
    }
    if (!inj.at("source_site").is_null()) out.source_site = inj.at("source_site").get<SiteId>();
  } catch (const json::exception& e) {
    throw ProcessingError(inj_path.string() + ": " + e.what());
  } catch (const InternalError& e) {
    throw ProcessingError(inj_path.string() + ": " + e.what());
  }
  if (out.homes.size() != static_cast<std::size_t>(out.config.n_agents)) {
    throw ProcessingError(inj_path.string() + ": homes do not match n_agents");
  }
  return raw;
}

}  // namespace uas
