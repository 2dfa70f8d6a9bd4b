#include "htmob/relevance.hpp"

#include <algorithm>

#include "htmob/error.hpp"

namespace htmob {

RelevanceTable relevance_table(std::span<const Visit> user_visits, const UserActivityProfile& profile) {
  if (user_visits.empty()) throw ContractViolation("relevance_table: user has no visits");
  if (profile.d_total < 1) throw ContractViolation("relevance_table: profile has d_total < 1");

  std::vector<std::pair<SymbolId, Day>> place_days;
  for (const Visit& v : user_visits) {
    if (v.user != profile.user) throw ContractViolation("relevance_table: visit does not belong to profiled user");
    for (Day d = v.first_day; d <= v.last_day; ++d) {
      if (!std::binary_search(profile.active_days.begin(), profile.active_days.end(), d)) {
        throw ContractViolation("relevance_table: visit day missing from the activity profile");
      }
      place_days.emplace_back(v.place, d);
    }
  }
  std::sort(place_days.begin(), place_days.end());
  place_days.erase(std::unique(place_days.begin(), place_days.end()), place_days.end());

  RelevanceTable table{profile.user, {}};
  for (std::size_t i = 0; i < place_days.size();) {
    std::size_t j = i;
    while (j < place_days.size() && place_days[j].first == place_days[i].first) ++j;
    const int d_visit = static_cast<int>(j - i);
    if (d_visit > profile.d_total) throw ContractViolation("relevance_table: d_visit exceeds d_total");
    table.records.push_back(RelevanceRecord{place_days[i].first, d_visit, profile.d_total,
                                            static_cast<double>(d_visit) / static_cast<double>(profile.d_total)});
    i = j;
  }
  std::sort(table.records.begin(), table.records.end(), [](const RelevanceRecord& a, const RelevanceRecord& b) {
    if (a.d_visit != b.d_visit) return a.d_visit > b.d_visit;
    return a.place < b.place;
  });
  return table;
}

RelevanceTable relevance_table(std::span<const Event> user_events, const UserActivityProfile& profile,
                               const Timezone& tz) {
  std::vector<Visit> visits;
  visits.reserve(user_events.size());
  for (const Event& e : user_events) {
    const Day d = tz.day_of(e.time);
    visits.push_back(Visit{e.user, e.place, d, d});
  }
  return relevance_table(visits, profile);
}

std::vector<RelevanceTable> cohort_relevance(const VisitLog& log, DTotalMode mode, unsigned workers) {
  if (log.visits.empty()) return {};
  if (!log.window) throw ContractViolation("cohort_relevance: visit log has no observation window");
  const auto users = log.by_user();
  std::vector<RelevanceTable> tables(users.size());
  parallel_for(users.size(), workers, [&](std::size_t i) {
    tables[i] = relevance_table(users[i], activity_profile(users[i], *log.window, mode));
  });
  return tables;
}

std::vector<RelevanceTable> cohort_relevance(const EventLog& log, DTotalMode mode, unsigned workers) {
  return cohort_relevance(visits_from_events(log), mode, workers);
}

}  // namespace htmob
