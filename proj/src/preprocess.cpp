#include "htmob/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "htmob/error.hpp"

namespace htmob {
namespace {

template <typename T>
std::vector<std::span<const T>> split_by_user(const std::vector<T>& items) {
  std::vector<std::span<const T>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= items.size(); ++i) {
    if (i == items.size() || items[i].user != items[begin].user) {
      out.emplace_back(items.data() + begin, i - begin);
      begin = i;
    }
  }
  return out;
}

void sort_visits(std::vector<Visit>& visits) {
  auto key = [](const Visit& v) { return std::tie(v.user, v.place, v.first_day, v.last_day); };
  std::sort(visits.begin(), visits.end(), [&](const Visit& a, const Visit& b) { return key(a) < key(b); });
  visits.erase(std::unique(visits.begin(), visits.end()), visits.end());
}

}  // namespace

PairingResult pair_sessions(std::span<const AssocEvent> events, Timestamp window_end) {
  PairingResult out;
  struct Open {
    SymbolId ap;
    Timestamp since;
  };
  std::optional<Open> open;
  SymbolId current_user = SymbolTable::kNone;

  auto close = [&](Timestamp at, bool trailing) {
    if (at > open->since) {
      out.stays.push_back(Stay{current_user, open->ap, open->since, at, trailing});
      if (trailing) ++out.trailing_closed;
    } else {
      ++out.zero_length;
    }
    open.reset();
  };

  for (const AssocEvent& e : events) {
    if (e.user != current_user) {
      if (open) close(std::max(window_end, open->since), true);
      current_user = e.user;
    }
    if (e.kind == AssocKind::kAssoc) {
      if (open && open->ap == e.ap) continue;
      if (open) close(e.time, false);
      open = Open{e.ap, e.time};
    } else if (open && open->ap == e.ap) {
      close(e.time, false);
    } else {
      ++out.orphan_disassocs;
    }
  }
  if (open) close(std::max(window_end, open->since), true);
  return out;
}

PairingResult pair_sessions(const AssocLog& log) {
  if (!log.window) return {};
  return pair_sessions(log.events, log.timezone.day_start(log.window->last + 1));
}

std::vector<Stay> extract_stays(std::span<const Stay> stays, const StayFilter& filter) {
  std::vector<Stay> merged;
  merged.reserve(stays.size());
  for (const Stay& s : stays) {
    if (!merged.empty()) {
      Stay& last = merged.back();
      if (last.user == s.user && last.place == s.place && s.start - last.end <= filter.merge_gap) {
        if (s.end > last.end) {
          last.end = s.end;
          last.closed_at_window_end = s.closed_at_window_end;
        }
        continue;
      }
    }
    merged.push_back(s);
  }
  std::erase_if(merged, [&](const Stay& s) { return s.duration() <= filter.min_pause; });
  return merged;
}

EventLog filter_active_users(const EventLog& log, const ActiveUserRule& rule) {
  if (!log.window) throw ContractViolation("filter_active_users: event log has no observation window");
  const int window_days = log.window->days();
  int required = window_days;
  if (rule.mode == ActiveUserMode::kFraction) {
    if (!(rule.min_fraction > 0.0 && rule.min_fraction <= 1.0)) {
      throw ContractViolation("filter_active_users: min_fraction must lie in (0, 1]");
    }
    required = static_cast<int>(std::ceil(rule.min_fraction * window_days - 1e-9));
  }

  EventLog out;
  out.symbols = log.symbols;
  out.window = log.window;
  out.timezone = log.timezone;
  std::vector<Day> days;
  for (auto slice : log.by_user()) {
    days.clear();
    for (const Event& e : slice) days.push_back(log.timezone.day_of(e.time));
    std::sort(days.begin(), days.end());
    const auto distinct = std::unique(days.begin(), days.end()) - days.begin();
    if (distinct >= required) out.events.insert(out.events.end(), slice.begin(), slice.end());
  }
  return out;
}

std::vector<std::span<const Visit>> VisitLog::by_user() const { return split_by_user(visits); }

VisitLog visits_from_events(const EventLog& log) {
  VisitLog out;
  out.symbols = log.symbols;
  out.window = log.window;
  out.visits.reserve(log.events.size());
  for (const Event& e : log.events) {
    const Day d = log.timezone.day_of(e.time);
    out.visits.push_back(Visit{e.user, e.place, d, d});
  }
  sort_visits(out.visits);
  return out;
}

VisitLog visits_from_stays(const SymbolTable& symbols, std::span<const Stay> stays, const Timezone& tz,
                           std::optional<DayWindow> window) {
  VisitLog out;
  out.symbols = symbols;
  out.visits.reserve(stays.size());
  for (const Stay& s : stays) {
    const Day first = tz.day_of(s.start);
    // The end instant is exclusive: a stay ending at midnight does not touch
    // the next day.
    const Day last = std::max(first, tz.day_of(s.end - std::chrono::seconds{1}));
    out.visits.push_back(Visit{s.user, s.place, first, last});
  }
  sort_visits(out.visits);
  if (window) {
    out.window = window;
  } else if (!out.visits.empty()) {
    DayWindow w{out.visits.front().first_day, out.visits.front().last_day};
    for (const Visit& v : out.visits) {
      w.first = std::min(w.first, v.first_day);
      w.last = std::max(w.last, v.last_day);
    }
    out.window = w;
  }
  return out;
}

UserActivityProfile activity_profile(std::span<const Event> user_events, const DayWindow& window, const Timezone& tz,
                                     DTotalMode mode) {
  if (user_events.empty()) throw ContractViolation("activity_profile: user has no events");
  std::vector<Visit> visits;
  visits.reserve(user_events.size());
  for (const Event& e : user_events) {
    const Day d = tz.day_of(e.time);
    visits.push_back(Visit{e.user, e.place, d, d});
  }
  return activity_profile(visits, window, mode);
}

UserActivityProfile activity_profile(std::span<const Visit> user_visits, const DayWindow& window, DTotalMode mode) {
  if (user_visits.empty()) throw ContractViolation("activity_profile: user has no visits");
  UserActivityProfile profile{user_visits.front().user, {}, 0};
  for (const Visit& v : user_visits) {
    if (v.user != profile.user) throw ContractViolation("activity_profile: visits belong to several users");
    for (Day d = v.first_day; d <= v.last_day; ++d) profile.active_days.push_back(d);
  }
  std::sort(profile.active_days.begin(), profile.active_days.end());
  profile.active_days.erase(std::unique(profile.active_days.begin(), profile.active_days.end()),
                            profile.active_days.end());
  if (profile.active_days.front() < window.first || profile.active_days.back() > window.last) {
    throw ContractViolation("activity_profile: activity outside the observation window");
  }
  profile.d_total = mode == DTotalMode::kWindowSpan ? window.days() : static_cast<int>(profile.active_days.size());
  return profile;
}

}  // namespace htmob
