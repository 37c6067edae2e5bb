#include "uas/anomalies.hpp"

#include "uas/error.hpp"

namespace uas {

std::string_view to_string(AnomalyType t) {
  switch (t) {
    case AnomalyType::Hunger: return "hunger";
    case AnomalyType::Work: return "work";
    case AnomalyType::Social: return "social";
    case AnomalyType::Interest: return "interest";
  }
  return "?";
}

std::string_view to_string(Intensity i) {
  switch (i) {
    case Intensity::Red: return "red";
    case Intensity::Orange: return "orange";
    case Intensity::Yellow: return "yellow";
  }
  return "?";
}

std::optional<AnomalyType> parse_anomaly_type(std::string_view text) {
  for (AnomalyType t : kAllAnomalyTypes) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::optional<Intensity> parse_intensity(std::string_view text) {
  for (Intensity i : kAllIntensities) {
    if (to_string(i) == text) return i;
  }
  return std::nullopt;
}

std::string label_code(AnomalyType type, Intensity intensity) {
  return std::to_string(code(type)) + std::to_string(code(intensity));
}

AnomalyProfile profile_for(AnomalyType type, Intensity intensity) {
  AnomalyProfile p;
  switch (type) {
    case AnomalyType::Hunger:
      switch (intensity) {
        case Intensity::Red: p.hunger_time_factor = 0.0; p.hunger_rate_factor = 3.0; break;
        case Intensity::Orange: p.hunger_time_factor = 0.5; p.hunger_rate_factor = 2.0; break;
        case Intensity::Yellow: p.hunger_time_factor = 0.75; p.hunger_rate_factor = 1.5; break;
      }
      break;
    case AnomalyType::Work:
    case AnomalyType::Social: {
      const double prob = intensity == Intensity::Red ? 1.0 : intensity == Intensity::Orange ? 0.5 : 0.2;
      (type == AnomalyType::Work ? p.work_skip_prob : p.social_random_prob) = prob;
      break;
    }
    case AnomalyType::Interest:
      p.interest_change_period_days = intensity == Intensity::Red ? 1 : intensity == Intensity::Orange ? 2 : 7;
      break;
  }
  return p;
}

BehaviorParams apply_profile(const BehaviorParams& baseline, const AnomalyProfile& profile) {
  BehaviorParams out = baseline;
  out.appetite_time_factor *= profile.hunger_time_factor;
  out.appetite_rate_factor *= profile.hunger_rate_factor;
  if (profile.work_skip_prob > 0.0) out.work_skip_prob = profile.work_skip_prob;
  if (profile.social_random_prob > 0.0) out.social_random_prob = profile.social_random_prob;
  if (profile.interest_change_period_days > 0) out.interest_change_period_days = profile.interest_change_period_days;
  return out;
}

ActiveAnomaly ActiveAnomaly::make(AgentId agent, AnomalyType type, Intensity intensity, Timestamp start,
                                  Timestamp end) {
  if (!(start < end)) throw InternalError("anomaly interval must satisfy start < end");
  return {agent, type, intensity, start, end, label_code(type, intensity)};
}

int switch_interest_group(int current, int group_count, Rng& rng) {
  if (group_count < 2) return current;
  const int pick = static_cast<int>(rng.index(static_cast<std::size_t>(group_count - 1)));
  return pick >= current ? pick + 1 : pick;
}

bool is_interest_switch_midnight(Timestamp now, Timestamp activated, int period_days) {
  if (period_days <= 0 || minute_of_day(now) != 0) return false;
  const std::int64_t days = day_index(now) - day_index(activated);
  return days > 0 && days % period_days == 0;
}

}  // namespace uas
