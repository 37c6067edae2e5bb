#include "uas/injection.hpp"

#include <algorithm>
#include <cmath>

#include "uas/error.hpp"

namespace uas {

std::string_view to_string(Compartment c) {
  switch (c) {
    case Compartment::Susceptible: return "S";
    case Compartment::Exposed: return "E";
    case Compartment::Infectious: return "I";
    case Compartment::Recovered: return "R";
  }
  return "?";
}

namespace {

void validate_range(const DayRange& r, const char* what) {
  if (!(r.min_days >= 0.0) || !(r.max_days >= r.min_days) || !std::isfinite(r.max_days)) {
    throw ConfigError(std::string(what) + ": day range must satisfy 0 <= min <= max");
  }
}

void validate_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + ": transmission_prob must be in [0, 1]");
}

}  // namespace

void EpidemicConfig::validate() const {
  if (initial_infected < 1) throw ConfigError("epidemic: initial_infected must be >= 1");
  validate_prob(transmission_prob, "epidemic");
  validate_range(exposed_days, "epidemic exposed_days");
  validate_range(infectious_days, "epidemic infectious_days");
}

void LocationSourceConfig::validate() const {
  validate_prob(transmission_prob, "location");
  validate_range(exposed_days, "location exposed_days");
  validate_range(active_days, "location active_days");
}

std::string_view to_string(SourceSelection s) {
  return s == SourceSelection::NearestToRandomAgent ? "random" : "popular";
}

std::optional<SourceSelection> parse_source_selection(std::string_view text) {
  if (text == "random") return SourceSelection::NearestToRandomAgent;
  if (text == "popular") return SourceSelection::MostPopular;
  return std::nullopt;
}

std::string_view to_string(InfectionCause::Kind k) {
  switch (k) {
    case InfectionCause::Kind::Seed: return "seed";
    case InfectionCause::Kind::Contact: return "contact";
    case InfectionCause::Kind::Location: return "location";
  }
  return "?";
}

std::optional<InfectionCause::Kind> parse_cause_kind(std::string_view text) {
  for (auto k : {InfectionCause::Kind::Seed, InfectionCause::Kind::Contact, InfectionCause::Kind::Location}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::int64_t draw_duration_minutes(DayRange range, Rng& rng, std::int64_t min_ticks) {
  const double days = rng.uniform(range.min_days, range.max_days);
  const auto lo_ticks = static_cast<std::int64_t>(std::ceil(range.min_days * kTicksPerDay - 1e-9));
  const auto hi_ticks = static_cast<std::int64_t>(std::floor(range.max_days * kTicksPerDay + 1e-9));
  std::int64_t ticks = std::llround(days * kTicksPerDay);
  ticks = std::clamp(ticks, std::max(lo_ticks, min_ticks), std::max(hi_ticks, min_ticks));
  return ticks * kTickMinutes;
}

Epidemic::Epidemic(std::size_t population) : states_(population), record_index_(population, -1) {}

std::optional<std::size_t> Epidemic::record_of(AgentId agent) const {
  const auto i = record_index_.at(static_cast<std::size_t>(agent));
  if (i < 0) return std::nullopt;
  return static_cast<std::size_t>(i);
}

Census Epidemic::census() const {
  Census c;
  for (const auto& s : states_) {
    switch (s.compartment) {
      case Compartment::Susceptible: ++c.susceptible; break;
      case Compartment::Exposed: ++c.exposed; break;
      case Compartment::Infectious: ++c.infectious; break;
      case Compartment::Recovered: ++c.recovered; break;
    }
  }
  return c;
}

bool Epidemic::infect_seed(AgentId agent, Timestamp at, DayRange infectious_days, Rng& rng) {
  auto& s = states_.at(static_cast<std::size_t>(agent));
  if (s.compartment != Compartment::Susceptible) return false;
  const Timestamp recovered = at + draw_duration_minutes(infectious_days, rng, 1);
  s = {Compartment::Infectious, recovered};
  record_index_[static_cast<std::size_t>(agent)] = static_cast<std::int32_t>(records_.size());
  records_.push_back({agent, {InfectionCause::Kind::Seed, -1, -1}, at, at, recovered});
  return true;
}

bool Epidemic::expose(AgentId agent, Timestamp at, InfectionCause cause, DayRange exposed_days,
                      DayRange infectious_days, Rng& rng) {
  auto& s = states_.at(static_cast<std::size_t>(agent));
  if (s.compartment != Compartment::Susceptible) return false;
  // At least one tick exposed so that the E->I transition lands on a later tick.
  const Timestamp infectious = at + draw_duration_minutes(exposed_days, rng, 1);
  const Timestamp recovered = infectious + draw_duration_minutes(infectious_days, rng, 1);
  s = {Compartment::Exposed, infectious};
  record_index_[static_cast<std::size_t>(agent)] = static_cast<std::int32_t>(records_.size());
  records_.push_back({agent, cause, at, infectious, recovered});
  return true;
}

std::vector<Transition> Epidemic::advance(Timestamp now) {
  std::vector<Transition> out;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    auto& s = states_[i];
    const auto agent = static_cast<AgentId>(i);
    if (s.compartment == Compartment::Exposed && s.until <= now) {
      const auto& rec = records_[static_cast<std::size_t>(record_index_[i])];
      out.push_back({agent, Compartment::Exposed, Compartment::Infectious, s.until});
      s = {Compartment::Infectious, rec.recovered_at};
    }
    if (s.compartment == Compartment::Infectious && s.until <= now) {
      out.push_back({agent, Compartment::Infectious, Compartment::Recovered, s.until});
      s = {Compartment::Recovered, s.until};
    }
  }
  return out;
}

AnomalyType draw_type(const TypeMix& mix, Rng& rng) {
  if (mix.fixed) return *mix.fixed;
  return kAllAnomalyTypes[rng.index(kAllAnomalyTypes.size())];
}

Intensity draw_intensity(const IntensityMix& mix, Rng& rng) {
  return kAllIntensities[rng.categorical(mix)];
}

std::vector<ActiveAnomaly> select_central(std::size_t population, std::size_t n, const TypeMix& types,
                                          const IntensityMix& intensities, Timestamp test_start,
                                          Timestamp test_end, Rng& rng) {
  if (n > population) {
    throw ConfigError("central selection of " + std::to_string(n) + " agents exceeds the population of " +
                      std::to_string(population));
  }
  auto chosen = rng.sample_without_replacement(population, n);
  std::sort(chosen.begin(), chosen.end());
  std::vector<ActiveAnomaly> out;
  out.reserve(n);
  for (std::size_t agent : chosen) {
    const AnomalyType type = draw_type(types, rng);
    const Intensity intensity = draw_intensity(intensities, rng);
    out.push_back(ActiveAnomaly::make(static_cast<AgentId>(agent), type, intensity, test_start, test_end));
  }
  return out;
}

std::vector<InfectionRecord> seed_epidemic(Epidemic& epidemic, const EpidemicConfig& config, Timestamp test_start,
                                           Rng& rng) {
  if (config.initial_infected < 1) throw ConfigError("epidemic: initial_infected must be >= 1");
  if (static_cast<std::size_t>(config.initial_infected) > epidemic.population()) {
    throw ConfigError("epidemic: initial_infected exceeds the population");
  }
  auto seeds = rng.sample_without_replacement(epidemic.population(), static_cast<std::size_t>(config.initial_infected));
  std::sort(seeds.begin(), seeds.end());
  std::vector<InfectionRecord> out;
  for (std::size_t agent : seeds) {
    const auto id = static_cast<AgentId>(agent);
    epidemic.infect_seed(id, test_start, config.infectious_days, rng);
    out.push_back(epidemic.records()[*epidemic.record_of(id)]);
  }
  return out;
}

std::vector<Transition> seir_tick(Epidemic& epidemic, std::span<const ContactPair> contacts,
                                  const EpidemicConfig& config, Timestamp clock, Rng& rng) {
  std::vector<Transition> out;
  for (const auto& c : contacts) {
    if (epidemic.state(c.susceptible).compartment != Compartment::Susceptible) continue;
    if (epidemic.state(c.infectious).compartment != Compartment::Infectious) continue;
    if (!rng.bernoulli(config.transmission_prob)) continue;
    epidemic.expose(c.susceptible, clock, {InfectionCause::Kind::Contact, c.infectious, c.site},
                    config.exposed_days, config.infectious_days, rng);
    out.push_back({c.susceptible, Compartment::Susceptible, Compartment::Exposed, clock});
  }
  return out;
}

SiteId select_source_site(const WorldMap& world, std::span<const AgentState> agents, SourceSelection selection,
                          std::span<const StayRecord> train_stays, Rng& rng) {
  if (selection == SourceSelection::MostPopular) {
    try {
      return popularity_rank(train_stays, SiteKind::Recreation).front();
    } catch (const NotFoundError&) {
      throw ConfigError("most-popular source selection needs recreation visits in the training period");
    }
  }
  if (agents.empty()) throw ConfigError("source selection needs at least one agent");
  const AgentState& a = agents[rng.index(agents.size())];
  return world.nearest_site_from_node(world.site(a.home).attached_node, SiteKind::Recreation).id;
}

bool LocationSource::first_draw(const SourceVisit& v) {
  auto [it, inserted] = last_visit_.emplace(v.agent_id, v.visit_start);
  if (inserted) return true;
  if (it->second == v.visit_start) return false;
  it->second = v.visit_start;
  return true;
}

std::vector<Transition> location_tick(LocationSource& source, std::span<const SourceVisit> visitors,
                                      Epidemic& epidemic, const LocationSourceConfig& config, Timestamp /*clock*/,
                                      Rng& rng) {
  std::vector<Transition> out;
  for (const auto& v : visitors) {
    if (!source.first_draw(v)) continue;
    if (epidemic.state(v.agent_id).compartment != Compartment::Susceptible) continue;
    if (!rng.bernoulli(config.transmission_prob)) continue;
    epidemic.expose(v.agent_id, v.visit_start, {InfectionCause::Kind::Location, -1, source.site()},
                    config.exposed_days, config.active_days, rng);
    out.push_back({v.agent_id, Compartment::Susceptible, Compartment::Exposed, v.visit_start});
  }
  return out;
}

ActiveAnomaly activate_behavior(const InfectionRecord& record, AnomalyType type, Intensity intensity) {
  return ActiveAnomaly::make(record.agent_id, type, intensity, record.infectious_at, record.recovered_at);
}

}  // namespace uas
