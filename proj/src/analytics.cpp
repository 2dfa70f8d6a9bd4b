#include "htmob/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "htmob/detail/random.hpp"
#include "htmob/error.hpp"

namespace htmob {
namespace {

std::vector<const UserClassification*> members(std::span<const UserClassification> cohort, int group) {
  std::vector<const UserClassification*> out;
  for (const auto& c : cohort) {
    if (c.group == group) out.push_back(&c);
  }
  return out;
}

std::vector<int> class_counts(const UserClassification& c) {
  std::vector<int> counts(static_cast<std::size_t>(c.group), 0);
  for (const auto& p : c.places) ++counts[static_cast<std::size_t>(p.cls - 1)];
  return counts;
}

double sq(double x) { return x * x; }

struct LloydRun {
  std::vector<double> centroids;
  std::vector<int> cluster_of;
  double objective;
  std::vector<double> trace;
};

// Nearest-centroid assignment with centroids ascending; ties go to the lower
// index. Returns the objective.
double assign(std::span<const double> values, const std::vector<double>& centroids, std::vector<int>& cluster_of) {
  double objective = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    int best = 0;
    double best_d = sq(values[i] - centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = sq(values[i] - centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    cluster_of[i] = best;
    objective += best_d;
  }
  return objective;
}

std::size_t sample_by_weight(std::span<const double> weights, double total, std::mt19937_64& rng) {
  double target = detail::unit(rng) * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (target < weights[i]) return i;
    target -= weights[i];
  }
  // Rounding may run off the end; take the last point with mass.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

std::vector<double> seed_plus_plus(std::span<const double> values, int k, std::mt19937_64& rng) {
  const std::size_t n = values.size();
  std::vector<double> centroids;
  centroids.push_back(values[detail::below(rng, n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq(values[i] - centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const std::size_t pick = total > 0.0 ? sample_by_weight(d2, total, rng) : detail::below(rng, n);
    centroids.push_back(values[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq(values[i] - values[pick]));
  }
  std::sort(centroids.begin(), centroids.end());
  return centroids;
}

LloydRun lloyd(std::span<const double> values, std::vector<double> centroids, const KMeansOptions& options) {
  const std::size_t n = values.size();
  const std::size_t k = centroids.size();
  LloydRun run;
  run.cluster_of.assign(n, 0);
  run.objective = assign(values, centroids, run.cluster_of);
  run.trace.push_back(run.objective);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(run.cluster_of[i])] += values[i];
      ++count[static_cast<std::size_t>(run.cluster_of[i])];
    }
    std::vector<double> next(k);
    for (std::size_t c = 0; c < k; ++c) {
      next[c] = count[c] > 0 ? sum[c] / static_cast<double>(count[c]) : centroids[c];
    }
    // An empty cluster takes over the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = sq(values[i] - next[static_cast<std::size_t>(run.cluster_of[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d > 0.0) next[c] = values[far];
    }
    std::sort(next.begin(), next.end());

    std::vector<int> cluster_of(n);
    const double objective = assign(values, next, cluster_of);
    const bool stalled = run.objective - objective <= options.tol * run.objective;
    if (objective <= run.objective) {
      centroids = std::move(next);
      run.cluster_of = std::move(cluster_of);
      run.objective = objective;
      run.trace.push_back(objective);
    }
    if (stalled) break;
  }
  run.centroids = std::move(centroids);
  return run;
}

// Single-point moves that lower the objective (Hartigan's rule), applied to
// a converged Lloyd run. Its fixed points are also Lloyd fixed points.
void refine(std::span<const double> values, LloydRun& run, const KMeansOptions& options) {
  const std::size_t n = values.size();
  const std::size_t k = run.centroids.size();
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[static_cast<std::size_t>(run.cluster_of[i])] += values[i];
    ++count[static_cast<std::size_t>(run.cluster_of[i])];
  }
  const double slack = options.tol * run.objective;
  bool moved = false;
  for (int pass = 0; pass < options.max_iter; ++pass) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(run.cluster_of[i]);
      if (count[a] < 2) continue;
      const double na = static_cast<double>(count[a]);
      const double removal = na / (na - 1.0) * sq(values[i] - sum[a] / na);
      std::size_t best = a;
      double best_delta = -slack;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = static_cast<double>(count[b]);
        const double added = count[b] == 0 ? 0.0 : nb / (nb + 1.0) * sq(values[i] - sum[b] / nb);
        const double delta = added - removal;
        if (delta < best_delta) {
          best_delta = delta;
          best = b;
        }
      }
      if (best == a) continue;
      sum[a] -= values[i];
      --count[a];
      sum[best] += values[i];
      ++count[best];
      run.cluster_of[i] = static_cast<int>(best);
      any = moved = true;
    }
    if (!any) break;
  }
  if (!moved) return;

  std::vector<double> means(k);
  for (std::size_t c = 0; c < k; ++c) means[c] = sum[c] / static_cast<double>(count[c]);
  std::sort(means.begin(), means.end());
  const double objective = assign(values, means, run.cluster_of);
  run.centroids = std::move(means);
  run.objective = objective;
  run.trace.push_back(run.objective);
}

}  // namespace

double CcdfCurve::evaluate(double x) const {
  if (points.empty() || x < points.front().x) return 1.0;
  auto it = std::upper_bound(points.begin(), points.end(), x, [](double v, const CcdfPoint& p) { return v < p.x; });
  return std::prev(it)->p;
}

CcdfCurve ccdf(std::span<const double> samples) {
  if (samples.empty()) throw ContractViolation("ccdf: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (const double v : sorted) {
    if (!std::isfinite(v)) throw ContractViolation("ccdf: non-finite sample");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  CcdfCurve curve;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    curve.points.push_back(CcdfPoint{sorted[i], static_cast<double>(sorted.size() - j) / n});
    i = j;
  }
  return curve;
}

ClassCurves class_rr_distributions(std::span<const UserClassification> cohort, int group) {
  ClassCurves out;
  out.group = group;
  const auto users = members(cohort, group);
  out.users = users.size();
  if (users.empty()) return out;
  std::vector<std::vector<double>> pooled(static_cast<std::size_t>(group));
  for (const auto* c : users) {
    for (const auto& p : c->places) pooled[static_cast<std::size_t>(p.cls - 1)].push_back(p.rr);
  }
  for (const auto& samples : pooled) out.classes.push_back(ccdf(samples));
  return out;
}

ClassCounts distinct_poi_counts(std::span<const UserClassification> cohort, int group) {
  ClassCounts out;
  out.group = group;
  const auto users = members(cohort, group);
  out.users = users.size();
  if (users.empty()) return out;
  out.counts.assign(static_cast<std::size_t>(group), {});
  for (const auto* c : users) {
    const auto counts = class_counts(*c);
    for (std::size_t k = 0; k < counts.size(); ++k) out.counts[k].push_back(counts[k]);
  }
  for (const auto& per_class : out.counts) {
    std::vector<double> samples(per_class.begin(), per_class.end());
    out.curves.push_back(ccdf(samples));
  }
  return out;
}

ClassComposition class_composition(std::span<const UserClassification> cohort, int group, Averaging averaging) {
  const auto users = members(cohort, group);
  if (users.empty()) throw ContractViolation("class_composition: no users in group " + std::to_string(group));
  ClassComposition out;
  out.group = group;
  out.users = users.size();
  out.averaging = averaging;
  out.percent.assign(static_cast<std::size_t>(group), 0.0);

  if (averaging == Averaging::kMacro) {
    std::vector<std::vector<double>> shares(static_cast<std::size_t>(group));
    for (const auto* c : users) {
      const auto counts = class_counts(*c);
      const double total = static_cast<double>(c->places.size());
      for (std::size_t k = 0; k < counts.size(); ++k) shares[k].push_back(100.0 * counts[k] / total);
    }
    for (std::size_t k = 0; k < shares.size(); ++k) {
      out.percent[k] = compensated_sum(shares[k]) / static_cast<double>(users.size());
    }
  } else {
    std::vector<std::size_t> pooled(static_cast<std::size_t>(group), 0);
    std::size_t total = 0;
    for (const auto* c : users) {
      const auto counts = class_counts(*c);
      for (std::size_t k = 0; k < counts.size(); ++k) pooled[k] += static_cast<std::size_t>(counts[k]);
      total += c->places.size();
    }
    for (std::size_t k = 0; k < pooled.size(); ++k) {
      out.percent[k] = 100.0 * static_cast<double>(pooled[k]) / static_cast<double>(total);
    }
  }
  return out;
}

PauseTimeReport pause_time_analysis(std::span<const Stay> stays, std::span<const UserClassification> cohort,
                                    int group) {
  if (stays.empty()) throw ContractViolation("pause_time_analysis: no stays");
  struct PairInfo {
    int cls;
    double rr;
    double total = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<SymbolId, SymbolId>, PairInfo> pairs;
  for (const auto* c : members(cohort, group)) {
    for (const auto& p : c->places) pairs.emplace(std::pair{c->user, p.place}, PairInfo{p.cls, p.rr});
  }

  PauseTimeReport out;
  out.group = group;
  std::vector<std::vector<double>> durations(static_cast<std::size_t>(group));
  for (const Stay& s : stays) {
    auto it = pairs.find({s.user, s.place});
    if (it == pairs.end()) continue;
    const double d = static_cast<double>(s.duration().count());
    durations[static_cast<std::size_t>(it->second.cls - 1)].push_back(d);
    it->second.total += d;
    ++it->second.n;
  }
  for (const auto& per_class : durations) {
    out.stays.push_back(per_class.size());
    if (per_class.empty()) {
      out.duration_ccdf.emplace_back();
      out.mean_duration.push_back(0.0);
    } else {
      out.duration_ccdf.push_back(ccdf(per_class));
      out.mean_duration.push_back(compensated_sum(per_class) / static_cast<double>(per_class.size()));
    }
  }

  std::vector<double> rr;
  std::vector<double> mean_stay;
  for (const auto& [key, info] : pairs) {
    if (info.n == 0) continue;
    rr.push_back(info.rr);
    mean_stay.push_back(info.total / static_cast<double>(info.n));
  }
  out.pairs = rr.size();
  if (rr.size() >= 2) out.spearman_rho = spearman(rr, mean_stay);
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractViolation("spearman: series lengths differ");
  if (x.size() < 2) throw ContractViolation("spearman: need at least two points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

KMeansResult kmeans_1d(std::span<const double> values, const KMeansOptions& options) {
  if (options.k < 1) throw ContractViolation("kmeans_1d: k must be at least 1");
  if (options.restarts < 1 || options.max_iter < 1 || !(options.tol >= 0.0)) {
    throw ContractViolation("kmeans_1d: restarts and max_iter must be positive, tol non-negative");
  }
  if (values.size() < static_cast<std::size_t>(options.k)) {
    throw ContractViolation("kmeans_1d: fewer values than clusters");
  }
  for (const double v : values) {
    if (!std::isfinite(v)) throw ContractViolation("kmeans_1d: non-finite value");
  }

  std::optional<LloydRun> best;
  for (int r = 0; r < options.restarts; ++r) {
    std::mt19937_64 rng(detail::mix_seed(options.seed, static_cast<std::uint64_t>(r)));
    LloydRun run = lloyd(values, seed_plus_plus(values, options.k, rng), options);
    refine(values, run, options);
    if (!best || run.objective < best->objective) best = std::move(run);
  }
  return KMeansResult{std::move(best->centroids), std::move(best->cluster_of), best->objective,
                      std::move(best->trace)};
}

double rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ContractViolation("rand_index: labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(n * (n - 1) / 2);
}

ComparisonReport compare_htb_kmeans(std::span<const RelevanceTable> tables,
                                    std::span<const UserClassification> classifications,
                                    const KMeansOptions& options, unsigned workers) {
  if (tables.empty()) throw ContractViolation("compare_htb_kmeans: empty cohort");
  if (tables.size() != classifications.size()) {
    throw ContractViolation("compare_htb_kmeans: tables and classifications differ in size");
  }
  std::vector<std::optional<double>> agreement(tables.size());
  parallel_for(tables.size(), workers, [&](std::size_t u) {
    const auto& table = tables[u];
    const auto& htb = classifications[u];
    if (table.user != htb.user) throw ContractViolation("compare_htb_kmeans: user order mismatch");
    if (table.records.size() < static_cast<std::size_t>(options.k)) return;
    // Both labelings indexed in place-id order.
    std::vector<double> rr(htb.places.size());
    std::vector<int> htb_labels(htb.places.size());
    for (std::size_t i = 0; i < htb.places.size(); ++i) {
      rr[i] = htb.places[i].rr;
      htb_labels[i] = htb.places[i].cls;
    }
    KMeansOptions per_user = options;
    per_user.seed = detail::mix_seed(options.seed, table.user);
    const auto km = kmeans_1d(rr, per_user);
    agreement[u] = rand_index(htb_labels, km.cluster_of);
  });

  ComparisonReport report;
  report.users = tables.size();
  report.kmeans_k = options.k;
  report.htb_classified = classifications.size();
  std::vector<double> scores;
  for (const auto& a : agreement) {
    if (a) scores.push_back(*a);
  }
  report.kmeans_classified = scores.size();
  report.common_users = scores.size();
  report.htb_coverage = static_cast<double>(report.htb_classified) / static_cast<double>(report.users);
  report.kmeans_coverage = static_cast<double>(report.kmeans_classified) / static_cast<double>(report.users);
  if (!scores.empty()) report.agreement = compensated_sum(scores) / static_cast<double>(scores.size());
  return report;
}

}  // namespace htmob
