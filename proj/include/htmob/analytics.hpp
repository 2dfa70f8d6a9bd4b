#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "htmob/htb.hpp"
#include "htmob/preprocess.hpp"
#include "htmob/relevance.hpp"

namespace htmob {

struct CcdfPoint {
  double x;
  double p;

  friend bool operator==(const CcdfPoint&, const CcdfPoint&) = default;
};

/// Empirical P(X > x), one point per distinct sample, x ascending.
struct CcdfCurve {
  std::vector<CcdfPoint> points;

  /// Step evaluation: 1 below the smallest sample, 0 at or above the largest.
  double evaluate(double x) const;
  friend bool operator==(const CcdfCurve&, const CcdfCurve&) = default;
};

/// Throws ContractViolation on empty input or non-finite samples.
CcdfCurve ccdf(std::span<const double> samples);

/// RR CCDF of each class (index 0 = class 1), pooled over the users of one
/// group. `users == 0` marks an empty group.
struct ClassCurves {
  int group = 0;
  std::size_t users = 0;
  std::vector<CcdfCurve> classes;

  bool empty() const noexcept { return users == 0; }
};

ClassCurves class_rr_distributions(std::span<const UserClassification> cohort, int group);

/// Distinct places per class for each user of one group.
struct ClassCounts {
  int group = 0;
  std::size_t users = 0;
  /// counts[c][u]: places of class c+1 for the u-th user of the group, users
  /// in cohort order.
  std::vector<std::vector<int>> counts;
  std::vector<CcdfCurve> curves;

  bool empty() const noexcept { return users == 0; }
};

ClassCounts distinct_poi_counts(std::span<const UserClassification> cohort, int group);

enum class Averaging { kMacro, kMicro };

/// Average share (in percent) of a user's places falling in each class.
struct ClassComposition {
  int group = 0;
  std::size_t users = 0;
  Averaging averaging = Averaging::kMacro;
  /// Index 0 = class 1 (EVP for group 3).
  std::vector<double> percent;
};

/// Macro averages per-user percentages; micro pools places over users.
/// Throws ContractViolation when the group is empty.
ClassComposition class_composition(std::span<const UserClassification> cohort, int group = 3,
                                   Averaging averaging = Averaging::kMacro);

struct PauseTimeReport {
  int group = 0;
  /// Per class, durations in seconds of stays at places of that class.
  std::vector<CcdfCurve> duration_ccdf;
  std::vector<double> mean_duration;
  std::vector<std::size_t> stays;
  /// (user, place) pairs of the group with at least one stay.
  std::size_t pairs = 0;
  /// Spearman correlation of rr against mean stay duration over the pairs;
  /// empty with fewer than two pairs.
  std::optional<double> spearman_rho;
};

/// Stays and classifications must share one symbol table. Throws
/// ContractViolation when `stays` is empty.
PauseTimeReport pause_time_analysis(std::span<const Stay> stays, std::span<const UserClassification> cohort,
                                    int group = 3);

/// Ranks starting at 1, ties receiving the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation with average ranks; 0 when either series is
/// constant. Throws ContractViolation on length mismatch or fewer than 2 points.
double spearman(std::span<const double> x, std::span<const double> y);

struct KMeansOptions {
  int k = 3;
  int restarts = 16;
  double tol = 1e-9;
  int max_iter = 200;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  /// Ascending.
  std::vector<double> centroids;
  /// Cluster index (into `centroids`) of each input value.
  std::vector<int> cluster_of;
  /// Within-cluster sum of squares.
  double objective = 0.0;
  /// Objective after each assignment step of the winning restart.
  std::vector<double> objective_trace;
};

/// Lloyd's algorithm from k-means++ seeds, then single-point moves while
/// they lower the objective; best of `restarts` runs.
/// Deterministic for a given seed. Throws ContractViolation when there are
/// fewer values than clusters or the options are out of range.
KMeansResult kmeans_1d(std::span<const double> values, const KMeansOptions& options = {});

/// Share of point pairs on which two labelings agree (same/different).
/// 1 for fewer than two points.
double rand_index(std::span<const int> a, std::span<const int> b);

struct ComparisonReport {
  std::size_t users = 0;
  std::size_t htb_classified = 0;
  std::size_t kmeans_classified = 0;
  double htb_coverage = 0.0;
  double kmeans_coverage = 0.0;
  /// Users classified by both methods.
  std::size_t common_users = 0;
  /// Mean per-user Rand index over the common users; empty when none.
  std::optional<double> agreement;
  int kmeans_k = 3;
};

/// Runs k-means on the rr values of every user with at least k places and
/// compares with the head/tail classes. `tables` and `classifications`
/// must be aligned by user.
ComparisonReport compare_htb_kmeans(std::span<const RelevanceTable> tables,
                                    std::span<const UserClassification> classifications,
                                    const KMeansOptions& options = {}, unsigned workers = 1);

}  // namespace htmob
