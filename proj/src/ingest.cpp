#include "htmob/ingest.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <tuple>

#include "htmob/error.hpp"

namespace htmob {
namespace {

constexpr std::size_t kMaxColumns = 64;

// Splits `line` on `delim` into `fields`; returns the field count, or
// kMaxColumns + 1 when the row has too many fields.
std::size_t split(std::string_view line, char delim, std::array<std::string_view, kMaxColumns>& fields) {
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (n == kMaxColumns) return kMaxColumns + 1;
    if (pos == std::string_view::npos) {
      fields[n++] = line.substr(start);
      return n;
    }
    fields[n++] = line.substr(start, pos - start);
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<Timestamp> parse_time(std::string_view text, TimestampFormat format, const Timezone& tz) {
  switch (format) {
    case TimestampFormat::kEpoch:
      return parse_epoch_seconds(text);
    case TimestampFormat::kIso8601:
      return parse_iso8601(text, tz);
    case TimestampFormat::kAuto:
      if (auto t = parse_epoch_seconds(text)) return t;
      return parse_iso8601(text, tz);
  }
  return std::nullopt;
}

// Drives a header-addressed delimiter-separated parse. `names` lists the
// required header names; `row` receives the fields in that order and
// returns false for a malformed row.
template <std::size_t N, typename RowFn>
void parse_table(std::istream& in, char delim, const std::array<std::string_view, N>& names,
                 const ParseOptions& options, std::size_t& rows, std::size_t& malformed, RowFn&& row) {
  std::string line;
  std::array<std::string_view, kMaxColumns> fields{};
  std::array<std::size_t, N> index{};
  std::size_t width = 0;
  bool have_header = false;

  while (std::getline(in, line)) {
    std::string_view view = line;
    if (!have_header && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;

    const std::size_t n = split(view, delim, fields);
    if (!have_header) {
      if (n > kMaxColumns) throw FormatError("header has too many columns");
      for (std::size_t k = 0; k < N; ++k) {
        auto it = std::find_if(fields.begin(), fields.begin() + n,
                               [&](std::string_view f) { return trim(f) == names[k]; });
        if (it == fields.begin() + n) {
          throw FormatError("missing column '" + std::string(names[k]) + "' in header");
        }
        index[k] = static_cast<std::size_t>(it - fields.begin());
      }
      width = n;
      have_header = true;
      continue;
    }

    ++rows;
    bool ok = n == width;
    if (ok) {
      std::array<std::string_view, N> picked{};
      for (std::size_t k = 0; k < N; ++k) picked[k] = trim(fields[index[k]]);
      ok = row(picked);
    }
    if (!ok) ++malformed;
  }
  if (in.bad()) throw IoError("read failure on input stream");
  if (rows > 0 && static_cast<double>(malformed) > options.max_malformed_fraction * static_cast<double>(rows)) {
    throw FormatError(std::to_string(malformed) + " of " + std::to_string(rows) +
                      " rows malformed (limit " + std::to_string(options.max_malformed_fraction) + ")");
  }
}

std::optional<DayWindow> window_of(auto begin, auto end, const Timezone& tz) {
  if (begin == end) return std::nullopt;
  Timestamp lo = begin->time;
  Timestamp hi = begin->time;
  for (auto it = begin; it != end; ++it) {
    lo = std::min(lo, it->time);
    hi = std::max(hi, it->time);
  }
  return DayWindow{tz.day_of(lo), tz.day_of(hi)};
}

}  // namespace

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kCall: return "call";
    case Channel::kSms: return "sms";
    case Channel::kData: return "data";
    case Channel::kWifi: return "wifi";
  }
  return "?";
}

std::optional<Channel> parse_channel(std::string_view text) {
  if (text == "call") return Channel::kCall;
  if (text == "sms") return Channel::kSms;
  if (text == "data") return Channel::kData;
  if (text == "wifi") return Channel::kWifi;
  return std::nullopt;
}

std::string_view to_string(AssocKind k) { return k == AssocKind::kAssoc ? "assoc" : "disassoc"; }

CdrParse parse_raw_cdr(std::istream& in, const CdrColumnMap& columns, const Timezone& tz,
                       const ParseOptions& options) {
  if (!in) throw IoError("CDR input stream is not readable");
  CdrParse out;
  const std::array<std::string_view, 4> names{columns.user, columns.timestamp, columns.place, columns.channel};
  parse_table(in, columns.delimiter, names, options, out.rows, out.malformed,
              [&](const std::array<std::string_view, 4>& f) {
                if (f[0].empty() || f[2].empty()) return false;
                auto time = parse_time(f[1], columns.timestamp_format, tz);
                auto channel = parse_channel(f[3]);
                if (!time || !channel) return false;
                if (*channel == Channel::kWifi && !options.allow_wifi_channel) return false;
                const SymbolId user = out.symbols.intern(f[0]);
                const SymbolId place = out.symbols.intern(f[2]);
                out.records.push_back(Event{user, place, *time, *channel});
                return true;
              });
  return out;
}

WifiParse parse_raw_wifi(std::istream& in, const WifiColumnMap& columns, const Timezone& tz,
                         const ParseOptions& options) {
  if (!in) throw IoError("WiFi input stream is not readable");
  WifiParse out;
  const std::array<std::string_view, 4> names{columns.user, columns.ap, columns.timestamp, columns.kind};
  parse_table(in, columns.delimiter, names, options, out.rows, out.malformed,
              [&](const std::array<std::string_view, 4>& f) {
                if (f[0].empty() || f[1].empty()) return false;
                auto time = parse_time(f[2], columns.timestamp_format, tz);
                if (!time) return false;
                AssocKind kind;
                if (f[3] == "assoc") {
                  kind = AssocKind::kAssoc;
                } else if (f[3] == "disassoc") {
                  kind = AssocKind::kDisassoc;
                } else {
                  return false;
                }
                const SymbolId user = out.symbols.intern(f[0]);
                const SymbolId ap = out.symbols.intern(f[1]);
                out.records.push_back(AssocEvent{user, ap, *time, kind});
                return true;
              });
  return out;
}

CdrParse parse_normalized(std::istream& in, const Timezone& tz, const ParseOptions& options) {
  ParseOptions opts = options;
  opts.allow_wifi_channel = true;
  return parse_raw_cdr(in, CdrColumnMap{}, tz, opts);
}

std::vector<std::span<const Event>> EventLog::by_user() const {
  std::vector<std::span<const Event>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= events.size(); ++i) {
    if (i == events.size() || events[i].user != events[begin].user) {
      out.emplace_back(events.data() + begin, i - begin);
      begin = i;
    }
  }
  return out;
}

EventLog normalize(const SymbolTable& symbols, std::vector<Event> events, const Timezone& tz) {
  std::vector<bool> used(symbols.size(), false);
  for (const Event& e : events) {
    used[e.user] = true;
    used[e.place] = true;
  }
  auto canon = symbols.canonical(used);
  for (Event& e : events) {
    e.user = canon.remap[e.user];
    e.place = canon.remap[e.place];
  }
  auto key = [](const Event& e) { return std::tie(e.user, e.time, e.place, e.channel); };
  std::sort(events.begin(), events.end(), [&](const Event& a, const Event& b) { return key(a) < key(b); });
  events.erase(std::unique(events.begin(), events.end()), events.end());

  EventLog log;
  log.window = window_of(events.begin(), events.end(), tz);
  log.symbols = std::move(canon.table);
  log.events = std::move(events);
  log.timezone = tz;
  return log;
}

EventLog normalize(CdrParse parsed, const Timezone& tz) {
  return normalize(parsed.symbols, std::move(parsed.records), tz);
}

AssocLog normalize(WifiParse parsed, const Timezone& tz) {
  std::vector<bool> used(parsed.symbols.size(), false);
  for (const AssocEvent& e : parsed.records) {
    used[e.user] = true;
    used[e.ap] = true;
  }
  auto canon = parsed.symbols.canonical(used);
  auto& events = parsed.records;
  for (AssocEvent& e : events) {
    e.user = canon.remap[e.user];
    e.ap = canon.remap[e.ap];
  }
  // kDisassoc sorts before kAssoc at equal times so a close/open pair at the
  // same instant does not supersede.
  auto key = [](const AssocEvent& e) {
    return std::make_tuple(e.user, e.time, e.kind == AssocKind::kAssoc, e.ap);
  };
  std::sort(events.begin(), events.end(), [&](const AssocEvent& a, const AssocEvent& b) { return key(a) < key(b); });
  events.erase(std::unique(events.begin(), events.end()), events.end());

  AssocLog log;
  log.window = window_of(events.begin(), events.end(), tz);
  log.symbols = std::move(canon.table);
  log.events = std::move(events);
  log.timezone = tz;
  return log;
}

void write_event_file(std::ostream& out, const EventLog& log) {
  out << "user_id,timestamp,place_id,channel\n";
  for (const Event& e : log.events) {
    out << log.symbols.name(e.user) << ',' << format_iso8601(e.time) << ',' << log.symbols.name(e.place) << ','
        << to_string(e.channel) << '\n';
  }
  if (!out) throw IoError("write failure on event file");
}

void write_wifi_file(std::ostream& out, const AssocLog& log) {
  out << "user_id,ap_id,timestamp,kind\n";
  for (const AssocEvent& e : log.events) {
    out << log.symbols.name(e.user) << ',' << log.symbols.name(e.ap) << ',' << e.time.time_since_epoch().count()
        << ',' << to_string(e.kind) << '\n';
  }
  if (!out) throw IoError("write failure on WiFi file");
}

}  // namespace htmob
