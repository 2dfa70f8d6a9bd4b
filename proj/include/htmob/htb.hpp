#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "htmob/relevance.hpp"

namespace htmob {

inline constexpr double kDefaultHeadLimit = 0.40;

/// Outcome of a head/tail breaks run over one vector of values.
struct HtbResult {
  /// Mean of each accepted split, strictly increasing.
  std::vector<double> breaks;
  /// Number of classes, `breaks.size() + 1`.
  int ht_index = 1;
  /// Class of each input value, 1 = lowest.
  std::vector<int> class_of;
  /// Head share of the partition at each accepted split.
  std::vector<double> head_fractions;

  friend bool operator==(const HtbResult&, const HtbResult&) = default;
};

/// Recursive head/tail breaks.
///
/// Each step splits the current partition at its arithmetic mean: values
/// strictly above the mean form the head, the rest the tail. Values within
/// a few ulps of the mean (`tie_threshold`) count as ties and go to the tail.
/// The first split is taken whenever the head is non-empty; every later
/// split requires a head share of at most `head_limit`. Recursion into a
/// head also requires that split to be a minority and the head to hold at
/// least two distinct values.
///
/// Means are the exact partition mean rounded to nearest, so the result does
/// not depend on input order.
///
/// Throws ContractViolation on empty input, non-positive or non-finite
/// values, or `head_limit` outside (0, 1).
HtbResult head_tail_breaks(std::span<const double> values, double head_limit = kDefaultHeadLimit);

/// Largest value still tied with `mean`.
double tie_threshold(double mean);

/// Compensated (Neumaier) sum of `values` in the given order.
double compensated_sum(std::span<const double> values);

enum class PlaceLabel { kEvp, kOvp, kMvp };

std::string_view to_string(PlaceLabel label);

struct PlaceClass {
  SymbolId place;
  double rr;
  int cls;
  /// Set only for users with ht-index 3.
  std::optional<PlaceLabel> label;

  friend bool operator==(const PlaceClass&, const PlaceClass&) = default;
};

struct UserClassification {
  SymbolId user;
  /// `htb.class_of` is aligned with `places`.
  HtbResult htb;
  int group;
  /// Sorted by place id.
  std::vector<PlaceClass> places;

  bool has_labels() const noexcept { return group == 3; }
  friend bool operator==(const UserClassification&, const UserClassification&) = default;
};

UserClassification classify_user(const RelevanceTable& table, double head_limit = kDefaultHeadLimit);

std::vector<UserClassification> classify_cohort(std::span<const RelevanceTable> tables,
                                                double head_limit = kDefaultHeadLimit, unsigned workers = 1);

struct GroupCount {
  int group;
  std::size_t users;
  double percent;

  friend bool operator==(const GroupCount&, const GroupCount&) = default;
};

/// Users per ht-index, for every group from 1 to the largest observed.
struct GroupDistribution {
  std::size_t cohort_size = 0;
  std::vector<GroupCount> groups;

  friend bool operator==(const GroupDistribution&, const GroupDistribution&) = default;
};

GroupDistribution group_cohort(std::span<const UserClassification> classifications);

}  // namespace htmob
