#pragma once

#include <cstdint>
#include <string>

namespace latentcast {

/// Epoch for all hour counting: 2000-01-01T00:00Z. Recorded in checkpoints so
/// time embeddings stay consistent across save/load.
inline constexpr std::int64_t kEpochYear = 2000;

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d);

/// Inverse of days_from_civil.
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

/// Parse "YYYY-MM-DDTHH:MM:SSZ" (seconds optional, 'Z' required) into hours
/// since 2000-01-01T00:00Z. Sub-hour components must be zero.
std::int64_t parse_iso_hours(const std::string& iso);

/// Format hours since 2000-01-01T00:00Z as "YYYY-MM-DDTHH:00:00Z".
std::string format_iso_hours(std::int64_t hours);

/// Day-of-year in [0, 365] for a timestamp in hours since the epoch.
int day_of_year(std::int64_t hours);

/// Hour-of-day in [0, 23].
int hour_of_day(std::int64_t hours);

}  // namespace latentcast
