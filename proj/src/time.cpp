#include "uas/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "uas/error.hpp"

namespace uas {
namespace {

// Proleptic Gregorian conversions (H. Hinnant's civil algorithms).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

static_assert(days_from_civil(1970, 1, 1) == 0);
static_assert(days_from_civil(2024, 1, 1) * kMinutesPerDay == kDefaultEpoch.minutes);

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  const auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw ConfigError("malformed timestamp '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string to_iso8601(Timestamp t) {
  const std::int64_t day = day_index(t);
  const int mod = minute_of_day(t);
  const Civil c = civil_from_days(day);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:00Z", static_cast<long long>(c.year), c.month, c.day,
                mod / 60, mod % 60);
  return buf;
}

Timestamp parse_iso8601(std::string_view text) {
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':' || text[19] != 'Z') {
    throw ConfigError("malformed timestamp '" + std::string(text) + "'");
  }
  const int year = parse_field(text, 0, 4);
  const int month = parse_field(text, 5, 2);
  const int day = parse_field(text, 8, 2);
  const int hour = parse_field(text, 11, 2);
  const int minute = parse_field(text, 14, 2);
  const int second = parse_field(text, 17, 2);
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                       std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second != 0) {
    throw ConfigError("timestamp out of range '" + std::string(text) + "'");
  }
  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return Timestamp{days * kMinutesPerDay + hour * 60 + minute};
}

const char* to_string(LoadErrorKind kind) {
  switch (kind) {
    case LoadErrorKind::Io: return "io error";
    case LoadErrorKind::Parse: return "parse error";
    case LoadErrorKind::Schema: return "schema error";
    case LoadErrorKind::DuplicateId: return "duplicate id";
    case LoadErrorKind::InvalidGeometry: return "invalid geometry";
    case LoadErrorKind::DisconnectedGraph: return "disconnected graph";
    case LoadErrorKind::MissingSiteKind: return "missing site kind";
  }
  return "load error";
}

}  // namespace uas
