#pragma once

#include <chrono>
#include <span>
#include <vector>

#include "htmob/ingest.hpp"

namespace htmob {

/// A contiguous association interval of a user at one access point.
struct Stay {
  SymbolId user;
  SymbolId place;
  Timestamp start;
  Timestamp end;
  /// Session had no disassociation and was closed at the window end.
  bool closed_at_window_end = false;

  std::chrono::seconds duration() const { return end - start; }
  friend bool operator==(const Stay&, const Stay&) = default;
};

struct PairingResult {
  std::vector<Stay> stays;
  std::size_t orphan_disassocs = 0;
  std::size_t trailing_closed = 0;
  /// Sessions superseded at the instant they opened.
  std::size_t zero_length = 0;
};

/// Reconstructs sessions from association events sorted per user by time.
///
/// A user holds at most one open session. A disassociation from the open
/// AP closes it; an association to another AP closes it at that instant
/// and opens the next one; a repeated association to the open AP is a
/// no-op. Sessions still open at the end of the user's events close at
/// `window_end` and are flagged.
PairingResult pair_sessions(std::span<const AssocEvent> events, Timestamp window_end);
/// Uses the end of the log's last local day as window end.
PairingResult pair_sessions(const AssocLog& log);

struct StayFilter {
  std::chrono::seconds min_pause{900};
  std::chrono::seconds merge_gap{60};
};

/// Merges flapping sessions and keeps only significant stays.
///
/// Adjacent stays of a user at the same AP separated by at most
/// `merge_gap` are merged, then stays lasting `min_pause` or less are
/// dropped. Input must be sorted per user by start.
std::vector<Stay> extract_stays(std::span<const Stay> stays, const StayFilter& filter = {});

enum class ActiveUserMode { kStrict, kFraction };

struct ActiveUserRule {
  ActiveUserMode mode = ActiveUserMode::kStrict;
  /// Minimum share of window days with activity in kFraction mode.
  double min_fraction = 1.0;
};

/// Keeps users active on every window day (or on the configured share of
/// days). All channels count as activity. Throws ContractViolation on a log
/// without window.
EventLog filter_active_users(const EventLog& log, const ActiveUserRule& rule = {});

enum class DTotalMode { kActiveDays, kWindowSpan };

struct UserActivityProfile {
  SymbolId user;
  std::vector<Day> active_days;  // ascending
  int d_total;
};

/// Place presence on a span of local days; an event is a one-day visit and
/// a stay covers every day it touches.
struct Visit {
  SymbolId user;
  SymbolId place;
  Day first_day;
  Day last_day;

  friend bool operator==(const Visit&, const Visit&) = default;
};

/// Visits sorted by (user, place, first_day, last_day).
struct VisitLog {
  SymbolTable symbols;
  std::vector<Visit> visits;
  std::optional<DayWindow> window;

  std::vector<std::span<const Visit>> by_user() const;
};

VisitLog visits_from_events(const EventLog& log);
VisitLog visits_from_stays(const SymbolTable& symbols, std::span<const Stay> stays, const Timezone& tz,
                           std::optional<DayWindow> window = std::nullopt);

/// Throws ContractViolation when the user has no events or the slice mixes users.
UserActivityProfile activity_profile(std::span<const Event> user_events, const DayWindow& window, const Timezone& tz,
                                     DTotalMode mode = DTotalMode::kActiveDays);
UserActivityProfile activity_profile(std::span<const Visit> user_visits, const DayWindow& window,
                                     DTotalMode mode = DTotalMode::kActiveDays);

}  // namespace htmob
