#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htmob/symbols.hpp"
#include "htmob/time.hpp"

namespace htmob {

enum class Channel : std::uint8_t { kCall, kSms, kData, kWifi };

std::string_view to_string(Channel c);
std::optional<Channel> parse_channel(std::string_view text);

/// One observation of a user at a place.
struct Event {
  SymbolId user;
  SymbolId place;
  Timestamp time;
  Channel channel;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class AssocKind : std::uint8_t { kAssoc, kDisassoc };

std::string_view to_string(AssocKind k);

struct AssocEvent {
  SymbolId user;
  SymbolId ap;
  Timestamp time;
  AssocKind kind;

  friend bool operator==(const AssocEvent&, const AssocEvent&) = default;
};

enum class TimestampFormat { kAuto, kIso8601, kEpoch };

/// Header names of the logical CDR columns. Column order in the file is free.
struct CdrColumnMap {
  std::string user = "user_id";
  std::string timestamp = "timestamp";
  std::string place = "place_id";
  std::string channel = "channel";
  TimestampFormat timestamp_format = TimestampFormat::kAuto;
  char delimiter = ',';
};

struct WifiColumnMap {
  std::string user = "user_id";
  std::string ap = "ap_id";
  std::string timestamp = "timestamp";
  std::string kind = "kind";
  TimestampFormat timestamp_format = TimestampFormat::kAuto;
  char delimiter = ',';
};

struct ParseOptions {
  /// Abort with FormatError when malformed rows exceed this share of rows.
  double max_malformed_fraction = 0.10;
  /// Accept the `wifi` channel (normalized interchange files only).
  bool allow_wifi_channel = false;
};

template <typename Record>
struct ParseResult {
  SymbolTable symbols;
  std::vector<Record> records;
  std::size_t rows = 0;
  std::size_t malformed = 0;
};

using CdrParse = ParseResult<Event>;
using WifiParse = ParseResult<AssocEvent>;

CdrParse parse_raw_cdr(std::istream& in, const CdrColumnMap& columns, const Timezone& tz,
                       const ParseOptions& options = {});
WifiParse parse_raw_wifi(std::istream& in, const WifiColumnMap& columns, const Timezone& tz,
                         const ParseOptions& options = {});
/// The pipeline interchange format: the CDR layout with `wifi` allowed.
CdrParse parse_normalized(std::istream& in, const Timezone& tz, const ParseOptions& options = {});

/// Inclusive span of local calendar days.
struct DayWindow {
  Day first;
  Day last;

  int days() const noexcept { return last - first + 1; }
  bool contains(Day d) const noexcept { return d >= first && d <= last; }
  friend bool operator==(const DayWindow&, const DayWindow&) = default;
};

/// Normalized, deduplicated event log over a canonical symbol table.
/// Events are sorted by (user, time, place, channel). An empty log has no
/// window; downstream operations reject it.
struct EventLog {
  SymbolTable symbols;
  std::vector<Event> events;
  std::optional<DayWindow> window;
  Timezone timezone;

  /// Contiguous per-user slices in user order.
  std::vector<std::span<const Event>> by_user() const;

  friend bool operator==(const EventLog& a, const EventLog& b) {
    return a.symbols == b.symbols && a.events == b.events && a.window == b.window;
  }
};

EventLog normalize(const SymbolTable& symbols, std::vector<Event> events, const Timezone& tz = {});
EventLog normalize(CdrParse parsed, const Timezone& tz = {});

/// Association log sorted by (user, time, kind, ap) with disassociations
/// ordered before associations at equal timestamps.
struct AssocLog {
  SymbolTable symbols;
  std::vector<AssocEvent> events;
  std::optional<DayWindow> window;
  Timezone timezone;

  friend bool operator==(const AssocLog& a, const AssocLog& b) {
    return a.symbols == b.symbols && a.events == b.events && a.window == b.window;
  }
};

AssocLog normalize(WifiParse parsed, const Timezone& tz = {});

/// Writes the interchange format: header plus one row per event, ISO-8601 UTC.
void write_event_file(std::ostream& out, const EventLog& log);
void write_wifi_file(std::ostream& out, const AssocLog& log);

}  // namespace htmob
