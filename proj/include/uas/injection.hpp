#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "uas/agents.hpp"
#include "uas/anomalies.hpp"
#include "uas/rng.hpp"
#include "uas/time.hpp"
#include "uas/worldmap.hpp"

namespace uas {

enum class Compartment { Susceptible, Exposed, Infectious, Recovered };

std::string_view to_string(Compartment c);

struct InfectionState {
  Compartment compartment = Compartment::Susceptible;
  Timestamp until;  // end of the Exposed / Infectious stage
};

struct DayRange {
  double min_days = 0.0;
  double max_days = 0.0;
  bool operator==(const DayRange&) const = default;
};

struct EpidemicConfig {
  int initial_infected = 10;
  double transmission_prob = 0.1;
  DayRange exposed_days{0.0, 7.0};
  DayRange infectious_days{7.0, 14.0};

  void validate() const;
  bool operator==(const EpidemicConfig&) const = default;
};

enum class SourceSelection { NearestToRandomAgent, MostPopular };

std::string_view to_string(SourceSelection s);  // "random" | "popular"
std::optional<SourceSelection> parse_source_selection(std::string_view text);

struct LocationSourceConfig {
  SourceSelection selection = SourceSelection::NearestToRandomAgent;
  double transmission_prob = 0.1;
  DayRange exposed_days{0.0, 7.0};
  DayRange active_days{7.0, 14.0};

  void validate() const;
  bool operator==(const LocationSourceConfig&) const = default;
};

struct InfectionCause {
  enum class Kind { Seed, Contact, Location };
  Kind kind = Kind::Seed;
  AgentId source_agent = -1;  // Contact only
  SiteId source_site = -1;    // site of transmission (Contact) or the source (Location)
  bool operator==(const InfectionCause&) const = default;
};

std::string_view to_string(InfectionCause::Kind k);
std::optional<InfectionCause::Kind> parse_cause_kind(std::string_view text);

struct InfectionRecord {
  AgentId agent_id = 0;
  InfectionCause cause;
  Timestamp exposed_at;
  Timestamp infectious_at;
  Timestamp recovered_at;
  bool operator==(const InfectionRecord&) const = default;
};

struct Transition {
  AgentId agent_id = 0;
  Compartment from = Compartment::Susceptible;
  Compartment to = Compartment::Susceptible;
  Timestamp at;
};

struct Census {
  int susceptible = 0;
  int exposed = 0;
  int infectious = 0;
  int recovered = 0;
  int total() const { return susceptible + exposed + infectious + recovered; }
};

/// S -> E -> I -> R state machine over a fixed population. Recovered is absorbing.
class Epidemic {
 public:
  explicit Epidemic(std::size_t population);

  std::size_t population() const { return states_.size(); }
  const InfectionState& state(AgentId agent) const { return states_.at(static_cast<std::size_t>(agent)); }
  const std::vector<InfectionRecord>& records() const { return records_; }
  /// Index into records() for an ever-infected agent.
  std::optional<std::size_t> record_of(AgentId agent) const;
  Census census() const;

  /// Seed straight into Infectious at `at` (no exposed stage). Returns false
  /// if the agent was not susceptible.
  bool infect_seed(AgentId agent, Timestamp at, DayRange infectious_days, Rng& rng);
  /// Susceptible -> Exposed at `at`; durations drawn uniformly (whole ticks).
  bool expose(AgentId agent, Timestamp at, InfectionCause cause, DayRange exposed_days, DayRange infectious_days,
              Rng& rng);
  /// Apply every E->I and I->R transition due at or before `now`, in agent order.
  std::vector<Transition> advance(Timestamp now);

 private:
  std::vector<InfectionState> states_;
  std::vector<InfectionRecord> records_;
  std::vector<std::int32_t> record_index_;
};

/// Uniform day count rounded to whole ticks.
std::int64_t draw_duration_minutes(DayRange range, Rng& rng, std::int64_t min_ticks = 0);

struct TypeMix {
  std::optional<AnomalyType> fixed;  // nullopt = combined: uniform over the four types
  bool operator==(const TypeMix&) const = default;
};

using IntensityMix = std::array<double, 3>;  // weights for red, orange, yellow

AnomalyType draw_type(const TypeMix& mix, Rng& rng);
Intensity draw_intensity(const IntensityMix& mix, Rng& rng);

/// `n` distinct agents, each anomalous over the whole test window. Sorted by agent id.
std::vector<ActiveAnomaly> select_central(std::size_t population, std::size_t n, const TypeMix& types,
                                          const IntensityMix& intensities, Timestamp test_start,
                                          Timestamp test_end, Rng& rng);

/// Seeds `initial_infected` random agents as Infectious at `test_start`.
std::vector<InfectionRecord> seed_epidemic(Epidemic& epidemic, const EpidemicConfig& config, Timestamp test_start,
                                           Rng& rng);

/// A susceptible agent sharing a site with an infectious one during a tick.
struct ContactPair {
  AgentId susceptible = 0;
  AgentId infectious = 0;
  SiteId site = 0;
};

/// One independent Bernoulli(transmission_prob) per pair; success exposes the susceptible.
std::vector<Transition> seir_tick(Epidemic& epidemic, std::span<const ContactPair> contacts,
                                  const EpidemicConfig& config, Timestamp clock, Rng& rng);

/// Source site for the location mechanism. `train_stays` is required for MostPopular.
SiteId select_source_site(const WorldMap& world, std::span<const AgentState> agents, SourceSelection selection,
                          std::span<const StayRecord> train_stays, Rng& rng);

struct SourceVisit {
  AgentId agent_id = 0;
  Timestamp visit_start;
};

/// Remembers which visits to the source site have already drawn.
class LocationSource {
 public:
  explicit LocationSource(SiteId site) : site_(site) {}
  SiteId site() const { return site_; }
  /// True the first time a given (agent, visit_start) is seen.
  bool first_draw(const SourceVisit& v);

 private:
  SiteId site_;
  std::map<AgentId, Timestamp> last_visit_;
};

/// Each susceptible visitor draws once per visit; success exposes it at the visit start.
std::vector<Transition> location_tick(LocationSource& source, std::span<const SourceVisit> visitors,
                                      Epidemic& epidemic, const LocationSourceConfig& config, Timestamp clock,
                                      Rng& rng);

/// Anomaly spanning exactly the infectious interval of a record.
ActiveAnomaly activate_behavior(const InfectionRecord& record, AnomalyType type, Intensity intensity);

}  // namespace uas
