#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace uas {

inline constexpr std::int64_t kTickMinutes = 5;
inline constexpr std::int64_t kMinutesPerDay = 1440;
inline constexpr std::int64_t kTicksPerDay = kMinutesPerDay / kTickMinutes;

/// Absolute simulation time, in whole minutes since 1970-01-01T00:00:00Z.
struct Timestamp {
  std::int64_t minutes = 0;

  constexpr auto operator<=>(const Timestamp&) const = default;

  constexpr Timestamp operator+(std::int64_t delta_minutes) const { return {minutes + delta_minutes}; }
  constexpr Timestamp operator-(std::int64_t delta_minutes) const { return {minutes - delta_minutes}; }
  constexpr std::int64_t operator-(Timestamp other) const { return minutes - other.minutes; }

  static constexpr Timestamp from_days(std::int64_t days) { return {days * kMinutesPerDay}; }
};

/// Half-open interval [start, end).
struct TimeWindow {
  Timestamp start;
  Timestamp end;

  constexpr bool contains(Timestamp t) const { return start <= t && t < end; }
  constexpr std::int64_t minutes() const { return end - start; }
  constexpr std::int64_t ticks() const { return minutes() / kTickMinutes; }
  constexpr double days() const { return static_cast<double>(minutes()) / kMinutesPerDay; }
  constexpr auto operator<=>(const TimeWindow&) const = default;
};

constexpr std::int64_t day_index(Timestamp t) {
  return t.minutes >= 0 ? t.minutes / kMinutesPerDay : -((-t.minutes + kMinutesPerDay - 1) / kMinutesPerDay);
}

constexpr int minute_of_day(Timestamp t) {
  return static_cast<int>(t.minutes - day_index(t) * kMinutesPerDay);
}

/// 0 = Monday ... 6 = Sunday. 1970-01-01 was a Thursday.
constexpr int weekday(Timestamp t) {
  const std::int64_t d = (day_index(t) + 3) % 7;
  return static_cast<int>(d < 0 ? d + 7 : d);
}

constexpr Timestamp midnight_of(Timestamp t) { return Timestamp::from_days(day_index(t)); }

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string to_iso8601(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SSZ" (seconds must be zero). Throws ConfigError otherwise.
Timestamp parse_iso8601(std::string_view text);

inline constexpr Timestamp kDefaultEpoch{28401120};  // 2024-01-01T00:00:00Z, a Monday

}  // namespace uas
