#pragma once

#include <span>
#include <vector>

#include "htmob/preprocess.hpp"

namespace htmob {

/// Relevance of one place for one user: the share of the user's recorded
/// days on which the place was visited.
struct RelevanceRecord {
  SymbolId place;
  int d_visit;
  int d_total;
  double rr;

  friend bool operator==(const RelevanceRecord&, const RelevanceRecord&) = default;
};

/// Records of one user, one per visited place, sorted by descending rr and
/// then ascending place id.
struct RelevanceTable {
  SymbolId user;
  std::vector<RelevanceRecord> records;

  friend bool operator==(const RelevanceTable&, const RelevanceTable&) = default;
};

/// Throws ContractViolation when the visits are empty or do not belong to
/// the profiled user.
RelevanceTable relevance_table(std::span<const Visit> user_visits, const UserActivityProfile& profile);
RelevanceTable relevance_table(std::span<const Event> user_events, const UserActivityProfile& profile,
                               const Timezone& tz);

/// One table per user in user-id order. `workers` > 1 splits users across threads.
std::vector<RelevanceTable> cohort_relevance(const VisitLog& log, DTotalMode mode = DTotalMode::kActiveDays,
                                             unsigned workers = 1);
std::vector<RelevanceTable> cohort_relevance(const EventLog& log, DTotalMode mode = DTotalMode::kActiveDays,
                                             unsigned workers = 1);

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; callers write results into pre-sized slots.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn);

}  // namespace htmob

#include "htmob/detail/parallel.hpp"
