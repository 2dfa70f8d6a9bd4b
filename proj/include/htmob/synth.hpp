#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "htmob/htb.hpp"
#include "htmob/ingest.hpp"

namespace htmob {

enum class SynthMode { kCdr, kWifi };

/// One relevance tier of planted places.
struct TierSpec {
  int places = 0;
  /// Each place draws its daily visit probability uniformly from [p_min, p_max].
  double p_min = 0.0;
  double p_max = 0.0;
  /// Mean stay duration in seconds (WiFi mode). Durations are uniform in
  /// [0.75, 1.25] times the mean.
  double stay_mean_seconds = 1800.0;
};

struct CohortSpec {
  SynthMode mode = SynthMode::kCdr;
  int user_count = 500;
  int window_days = 60;
  TierSpec mvp{2, 0.8, 1.0, 3.0 * 3600.0};
  TierSpec ovp{5, 0.2, 0.4, 3600.0};
  TierSpec evp{50, 0.01, 0.05, 1800.0};
  /// Above 1, each user's EVP count is drawn from a discrete power law
  /// with this exponent and minimum `evp.places`, capped at `max_evp_places`.
  double evp_tail_exponent = 0.0;
  int max_evp_places = 1000;
  /// Relative weights of call, sms, data (CDR mode).
  std::array<double, 3> channel_mix{0.4, 0.2, 0.4};
  /// Size of the shared place-id pool users draw from.
  int place_pool = 5000;
  /// First day of the window (days since 1970-01-01, UTC). 2015-03-02.
  Day start_day = 16496;
  std::uint64_t seed = 42;

  /// Throws ContractViolation when a field is out of range.
  void validate() const;
};

struct PlantedUser {
  std::string user;
  int expected_ht_index;
  /// Planted tier of every place, sorted by place id.
  std::vector<std::pair<std::string, PlaceLabel>> places;
  /// Daily visit probability of each place, aligned with `places`. Not
  /// stored in the truth file.
  std::vector<double> probability;
};

struct PlantedTruth {
  /// Sorted by user id.
  std::vector<PlantedUser> users;
};

struct SyntheticCohort {
  SymbolTable symbols;
  /// CDR mode.
  std::vector<Event> events;
  /// WiFi mode; an assoc/disassoc pair per visit.
  std::vector<AssocEvent> assoc;
  PlantedTruth truth;
};

/// Each place is visited independently on each day with its planted
/// probability, at a uniform time of day (CDR) or as a non-overlapping
/// stay (WiFi). Users are generated from independent streams derived from
/// (seed, user index).
SyntheticCohort generate_cohort(const CohortSpec& spec);

/// Truth file: header `user_id,place_id,tier`, rows sorted.
void write_truth_file(std::ostream& out, const PlantedTruth& truth);
/// Throws FormatError on a malformed file.
PlantedTruth read_truth_file(std::istream& in);

struct RecoveryMetrics {
  std::size_t users = 0;
  std::size_t ht_recovered = 0;
  double ht_recovery_rate = 0.0;
  /// Users classified into group 3 and the places labeled for them.
  std::size_t group3_users = 0;
  std::size_t labeled_places = 0;
  std::size_t correct_labels = 0;
  double label_accuracy = 0.0;
};

/// Scores classifications against planted truth. Every classified user and
/// place must appear in the truth (ContractViolation otherwise); planted
/// places never visited are ignored.
RecoveryMetrics evaluate_recovery(std::span<const UserClassification> classifications, const SymbolTable& symbols,
                                  const PlantedTruth& truth);

}  // namespace htmob
