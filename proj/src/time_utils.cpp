#include "latentcast/time_utils.hpp"

#include <cstdio>
#include <cstdlib>

#include "latentcast/common.hpp"

namespace latentcast {

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Howard Hinnant's algorithm, days relative to 1970-01-01.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

namespace {
const std::int64_t kEpochDays1970 = days_from_civil(2000, 1, 1);
}

std::int64_t parse_iso_hours(const std::string& iso) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char z = 0;
  int n = std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &z);
  if (n == 5) {  // seconds omitted: YYYY-MM-DDTHH:MMZ
    n = std::sscanf(iso.c_str(), "%d-%d-%dT%d:%d%c", &y, &mo, &d, &h, &mi, &z);
    s = 0;
    if (n != 6) throw DataError("unparseable ISO-8601 timestamp: " + iso);
  } else if (n != 7) {
    throw DataError("unparseable ISO-8601 timestamp: " + iso);
  }
  if (z != 'Z') throw DataError("timestamp must be UTC ('Z' suffix): " + iso);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23)
    throw DataError("timestamp field out of range: " + iso);
  if (mi != 0 || s != 0)
    throw DataError("sub-hour timestamps are not representable: " + iso);
  return (days_from_civil(y, mo, d) - kEpochDays1970) * 24 + h;
}

std::string format_iso_hours(std::int64_t hours) {
  std::int64_t days = hours >= 0 ? hours / 24 : (hours - 23) / 24;
  int h = static_cast<int>(hours - days * 24);
  int y, m, d;
  civil_from_days(days + kEpochDays1970, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00Z", y, m, d, h);
  return std::string(buf);
}

int day_of_year(std::int64_t hours) {
  std::int64_t days = hours >= 0 ? hours / 24 : (hours - 23) / 24;
  int y, m, d;
  civil_from_days(days + kEpochDays1970, y, m, d);
  return static_cast<int>(days + kEpochDays1970 - days_from_civil(y, 1, 1));
}

int hour_of_day(std::int64_t hours) {
  std::int64_t days = hours >= 0 ? hours / 24 : (hours - 23) / 24;
  return static_cast<int>(hours - days * 24);
}

}  // namespace latentcast
