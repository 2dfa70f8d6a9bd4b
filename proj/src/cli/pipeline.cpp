#include "htmob/cli/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "htmob/error.hpp"

namespace htmob::cli {
namespace {

template <typename Record, typename ParseFn>
std::vector<ParseResult<Record>> parse_inputs(const RunConfig& config, ParseFn&& parse) {
  if (config.inputs.empty()) throw ConfigError("no input files given");
  std::vector<ParseResult<Record>> parsed(config.inputs.size());
  parallel_for(config.inputs.size(), config.workers, [&](std::size_t i) {
    std::ifstream in(config.inputs[i], std::ios::binary);
    if (!in) throw IoError("cannot open input '" + config.inputs[i] + "'");
    try {
      parsed[i] = parse(in);
    } catch (const FormatError& e) {
      throw FormatError(config.inputs[i] + ": " + e.what());
    }
  });
  return parsed;
}

// Folds several parses into the first one's symbol space.
template <typename Record, typename RemapFn>
ParseResult<Record> merge(std::vector<ParseResult<Record>> parts, RemapFn&& remap) {
  ParseResult<Record> out = std::move(parts.front());
  for (std::size_t p = 1; p < parts.size(); ++p) {
    auto& part = parts[p];
    std::vector<SymbolId> ids(part.symbols.size());
    for (SymbolId i = 0; i < ids.size(); ++i) ids[i] = out.symbols.intern(part.symbols.name(i));
    for (Record r : part.records) {
      remap(r, ids);
      out.records.push_back(r);
    }
    out.rows += part.rows;
    out.malformed += part.malformed;
  }
  return out;
}

std::size_t count_users(const auto& records) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i == 0 || records[i].user != records[i - 1].user) ++n;
  }
  return n;
}

std::size_t count_places(const VisitLog& visits) {
  std::vector<SymbolId> places;
  places.reserve(visits.visits.size());
  for (const auto& v : visits.visits) places.push_back(v.place);
  std::sort(places.begin(), places.end());
  return static_cast<std::size_t>(std::unique(places.begin(), places.end()) - places.begin());
}

void emit(const std::string& path, const EventLog& log) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_event_file(out, log);
}

}  // namespace

EventLog stays_to_event_log(const SymbolTable& symbols, std::span<const Stay> stays, const Timezone& tz) {
  std::vector<Event> events;
  events.reserve(stays.size());
  for (const Stay& s : stays) {
    const Day first = tz.day_of(s.start);
    const Day last = std::max(first, tz.day_of(s.end - std::chrono::seconds{1}));
    for (Day d = first; d <= last; ++d) {
      events.push_back(Event{s.user, s.place, std::max(s.start, tz.day_start(d)), Channel::kWifi});
    }
  }
  return normalize(symbols, std::move(events), tz);
}

Analysis run_pipeline(const RunConfig& config) {
  config.validate();
  Analysis a;
  a.timezone = Timezone::parse(config.timezone);
  a.summary.kind = config.kind;
  ParseOptions options;
  options.max_malformed_fraction = config.max_malformed_fraction;

  VisitLog visits;
  if (config.kind == DatasetKind::kWifi) {
    WifiColumnMap columns;
    columns.timestamp_format = config.timestamp_format;
    auto parts = parse_inputs<AssocEvent>(config, [&](std::istream& in) {
      return parse_raw_wifi(in, columns, a.timezone, options);
    });
    auto parsed = merge(std::move(parts), [](AssocEvent& e, const std::vector<SymbolId>& ids) {
      e.user = ids[e.user];
      e.ap = ids[e.ap];
    });
    a.summary.input_rows = parsed.rows;
    a.summary.malformed_rows = parsed.malformed;
    const AssocLog log = normalize(std::move(parsed), a.timezone);
    a.summary.users_before = count_users(log.events);
    a.summary.window = log.window;

    auto paired = pair_sessions(log);
    a.summary.sessions = paired.stays.size();
    a.summary.orphan_disassocs = paired.orphan_disassocs;
    a.summary.trailing_closed = paired.trailing_closed;
    a.stays = extract_stays(paired.stays,
                            StayFilter{std::chrono::seconds{config.min_pause_seconds},
                                       std::chrono::seconds{config.merge_gap_seconds}});
    a.summary.significant_stays = a.stays.size();
    a.symbols = log.symbols;
    visits = visits_from_stays(log.symbols, a.stays, a.timezone, log.window);
    if (!config.emit_normalized.empty()) emit(config.emit_normalized, stays_to_event_log(log.symbols, a.stays, a.timezone));
  } else {
    CdrColumnMap columns;
    columns.timestamp_format = config.timestamp_format;
    ParseOptions cdr_options = options;
    cdr_options.allow_wifi_channel = config.kind == DatasetKind::kNormalized;
    auto parts = parse_inputs<Event>(config, [&](std::istream& in) {
      return parse_raw_cdr(in, columns, a.timezone, cdr_options);
    });
    auto parsed = merge(std::move(parts), [](Event& e, const std::vector<SymbolId>& ids) {
      e.user = ids[e.user];
      e.place = ids[e.place];
    });
    a.summary.input_rows = parsed.rows;
    a.summary.malformed_rows = parsed.malformed;
    EventLog log = normalize(std::move(parsed), a.timezone);
    a.summary.users_before = count_users(log.events);
    a.summary.window = log.window;
    if (!log.window) throw ContractViolation("input contains no events");
    // Interchange files are already preprocessed.
    if (config.kind == DatasetKind::kCdr) {
      log = filter_active_users(log, ActiveUserRule{config.active_mode, config.active_fraction});
    }
    emit(config.emit_normalized, log);
    a.symbols = log.symbols;
    visits = visits_from_events(log);
  }

  if (visits.visits.empty()) throw ContractViolation("no users left after preprocessing");
  a.summary.pois = count_places(visits);
  a.tables = cohort_relevance(visits, config.d_total_mode, config.workers);
  a.summary.users_after = a.tables.size();
  a.classifications = classify_cohort(a.tables, config.head_limit, config.workers);
  return a;
}

}  // namespace htmob::cli
