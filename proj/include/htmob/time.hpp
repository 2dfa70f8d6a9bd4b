#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace htmob {

/// UTC instant at one-second resolution.
using Timestamp = std::chrono::sys_seconds;

/// Calendar day number in some local timezone, counted from 1970-01-01.
using Day = std::int32_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// Maps UTC instants to local calendar days.
///
/// Accepts "UTC", a fixed offset ("+01:00", "UTC-05:30") or an IANA zone
/// name resolved against the system zoneinfo database. Instants past the
/// last recorded transition of an IANA zone use the last known offset.
class Timezone {
 public:
  Timezone() : name_("UTC") {}

  static Timezone utc() { return Timezone{}; }
  static Timezone fixed(std::string name, std::chrono::seconds offset);
  /// Throws ConfigError for unknown names or malformed offsets.
  static Timezone parse(std::string_view spec);

  const std::string& name() const noexcept { return name_; }
  bool is_utc() const noexcept { return transitions_.empty() && base_offset_ == 0; }

  std::chrono::seconds offset_at(Timestamp t) const;
  Day day_of(Timestamp t) const;
  /// First instant whose local day is `d`.
  Timestamp day_start(Day d) const;
  /// Converts a local wall-clock reading (seconds since local epoch).
  Timestamp from_local(std::int64_t local_seconds) const;

 private:
  std::string name_;
  std::int64_t base_offset_ = 0;
  std::vector<std::int64_t> transitions_;
  std::vector<std::int64_t> offsets_;
};

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]". A reading without a
/// zone designator is local time in `tz`. Returns nullopt on any syntax or
/// range error.
std::optional<Timestamp> parse_iso8601(std::string_view text, const Timezone& tz);

/// Parses a base-10 integer count of seconds since the Unix epoch.
std::optional<Timestamp> parse_epoch_seconds(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

/// "YYYY-MM-DD" for a day number.
std::string format_day(Day d);

}  // namespace htmob
