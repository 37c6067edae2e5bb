#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "uas/rng.hpp"
#include "uas/time.hpp"

namespace uas {

using AgentId = std::int32_t;

enum class AnomalyType { Hunger = 1, Work = 2, Social = 3, Interest = 4 };
enum class Intensity { Red = 1, Orange = 2, Yellow = 3 };

inline constexpr std::array kAllAnomalyTypes{AnomalyType::Hunger, AnomalyType::Work, AnomalyType::Social,
                                             AnomalyType::Interest};
inline constexpr std::array kAllIntensities{Intensity::Red, Intensity::Orange, Intensity::Yellow};

constexpr int code(AnomalyType t) { return static_cast<int>(t); }
constexpr int code(Intensity i) { return static_cast<int>(i); }

std::string_view to_string(AnomalyType t);  // "hunger", "work", "social", "interest"
std::string_view to_string(Intensity i);    // "red", "orange", "yellow"
std::optional<AnomalyType> parse_anomaly_type(std::string_view text);
std::optional<Intensity> parse_intensity(std::string_view text);

/// Ground-truth label: type code followed by intensity code, e.g. (Hunger, Orange) -> "12".
std::string label_code(AnomalyType type, Intensity intensity);
inline const std::string kNormalLabel = "0";

/// Per-agent behaviour parameters that anomalies may alter.
struct BehaviorParams {
  double appetite_time_factor = 1.0;
  double appetite_rate_factor = 1.0;
  double work_skip_prob = 0.0;
  double social_random_prob = 0.0;
  int interest_change_period_days = 0;  // 0 = never
  int interest_group = 0;
  bool operator==(const BehaviorParams&) const = default;
};

/// Behaviour deltas for one (type, intensity). Neutral values: factors 1, probabilities 0, period 0.
struct AnomalyProfile {
  double hunger_time_factor = 1.0;
  double hunger_rate_factor = 1.0;
  double work_skip_prob = 0.0;
  double social_random_prob = 0.0;
  int interest_change_period_days = 0;
  bool operator==(const AnomalyProfile&) const = default;
};

AnomalyProfile profile_for(AnomalyType type, Intensity intensity);

/// Effective parameters while the profile is active. Only the fields the
/// profile's type owns change; the interest group itself is switched by
/// `switch_interest_group` on the period schedule.
BehaviorParams apply_profile(const BehaviorParams& baseline, const AnomalyProfile& profile);

struct ActiveAnomaly {
  AgentId agent_id = 0;
  AnomalyType type = AnomalyType::Hunger;
  Intensity intensity = Intensity::Red;
  Timestamp start;
  Timestamp end;
  std::string label;

  static ActiveAnomaly make(AgentId agent, AnomalyType type, Intensity intensity, Timestamp start, Timestamp end);
  bool operator==(const ActiveAnomaly&) const = default;
};

/// Resample the interest group uniformly among the *other* groups.
int switch_interest_group(int current, int group_count, Rng& rng);

/// True on local midnights at which an interest anomaly activated at
/// `activated` switches again (every `period_days` whole days afterwards).
bool is_interest_switch_midnight(Timestamp now, Timestamp activated, int period_days);

}  // namespace uas
