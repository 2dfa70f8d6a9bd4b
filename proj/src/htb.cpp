#include "htmob/htb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "htmob/error.hpp"

namespace htmob {

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

namespace {

// Exact sum of doubles as non-overlapping partials, smallest magnitude first.
class Expansion {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  // Adds a*b exactly.
  void add_product(double a, double b) {
    const double h = a * b;
    add(h);
    add(std::fma(a, b, -h));
  }

  int sign() const {
    for (auto it = partials_.rbegin(); it != partials_.rend(); ++it) {
      if (*it > 0.0) return 1;
      if (*it < 0.0) return -1;
    }
    return 0;
  }

  // Sum rounded to nearest, ties to even.
  double rounded() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != 0.0) break;
    }
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

// Sign of 2*sum - (a + b) * n, i.e. of sum/n relative to the midpoint of a and b.
int side_of_midpoint(std::span<const double> values, double a, double b, double n) {
  Expansion e;
  for (const double v : values) e.add(2.0 * v);
  e.add_product(-a, n);
  e.add_product(-b, n);
  return e.sign();
}

bool even_mantissa(double x) {
  int exp = 0;
  const double m = std::frexp(x, &exp);
  return static_cast<std::int64_t>(std::ldexp(m, 53)) % 2 == 0;
}

// Arithmetic mean rounded to nearest (ties to even) from the exact sum.
double exact_mean(std::span<const double> values) {
  Expansion sum;
  for (const double v : values) sum.add(v);
  const double n = static_cast<double>(values.size());
  double q = sum.rounded() / n;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  while (true) {
    const double up = std::nextafter(q, kInf);
    const int s_up = side_of_midpoint(values, q, up, n);
    if (s_up > 0 || (s_up == 0 && even_mantissa(up))) {
      q = up;
      continue;
    }
    const double down = std::nextafter(q, -kInf);
    const int s_down = side_of_midpoint(values, q, down, n);
    if (s_down < 0 || (s_down == 0 && even_mantissa(down))) {
      q = down;
      continue;
    }
    return q;
  }
}

}  // namespace

double tie_threshold(double mean) {
  // Rounding in the mean and in transformed inputs stays within a few ulps
  // of |mean| for positive data.
  constexpr double kTieUlps = 8.0;
  return mean + kTieUlps * std::numeric_limits<double>::epsilon() * std::abs(mean);
}

HtbResult head_tail_breaks(std::span<const double> values, double head_limit) {
  if (values.empty()) throw ContractViolation("head_tail_breaks: empty input");
  if (!(head_limit > 0.0 && head_limit < 1.0)) {
    throw ContractViolation("head_tail_breaks: head_limit must lie in (0, 1)");
  }
  for (const double v : values) {
    if (!std::isfinite(v) || v <= 0.0) throw ContractViolation("head_tail_breaks: values must be positive and finite");
  }

  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = values[order[i]];

  HtbResult result;
  result.class_of.assign(n, 0);
  std::size_t lo = 0;
  int cls = 1;
  while (true) {
    const std::span<const double> partition(sorted.data() + lo, n - lo);
    const double mean = exact_mean(partition);
    const std::size_t head =
        static_cast<std::size_t>(std::upper_bound(sorted.begin() + lo, sorted.end(), tie_threshold(mean)) -
                                 sorted.begin());
    if (head == n) break;
    const double fraction = static_cast<double>(n - head) / static_cast<double>(n - lo);
    if (!result.breaks.empty() && fraction > head_limit) break;

    result.breaks.push_back(mean);
    result.head_fractions.push_back(fraction);
    for (std::size_t i = lo; i < head; ++i) result.class_of[order[i]] = cls;
    ++cls;
    lo = head;
    if (fraction > head_limit || sorted[lo] == sorted[n - 1]) break;
  }
  for (std::size_t i = lo; i < n; ++i) result.class_of[order[i]] = cls;
  result.ht_index = cls;
  return result;
}

std::string_view to_string(PlaceLabel label) {
  switch (label) {
    case PlaceLabel::kEvp: return "EVP";
    case PlaceLabel::kOvp: return "OVP";
    case PlaceLabel::kMvp: return "MVP";
  }
  return "?";
}

UserClassification classify_user(const RelevanceTable& table, double head_limit) {
  if (table.records.empty()) throw ContractViolation("classify_user: empty relevance table");
  std::vector<RelevanceRecord> records = table.records;
  std::sort(records.begin(), records.end(),
            [](const RelevanceRecord& a, const RelevanceRecord& b) { return a.place < b.place; });
  std::vector<double> rr(records.size());
  std::transform(records.begin(), records.end(), rr.begin(), [](const RelevanceRecord& r) { return r.rr; });

  UserClassification out;
  out.user = table.user;
  out.htb = head_tail_breaks(rr, head_limit);
  out.group = out.htb.ht_index;
  out.places.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    PlaceClass pc{records[i].place, records[i].rr, out.htb.class_of[i], std::nullopt};
    if (out.group == 3) pc.label = static_cast<PlaceLabel>(pc.cls - 1);
    out.places.push_back(pc);
  }
  return out;
}

std::vector<UserClassification> classify_cohort(std::span<const RelevanceTable> tables, double head_limit,
                                                unsigned workers) {
  std::vector<UserClassification> out(tables.size());
  parallel_for(tables.size(), workers, [&](std::size_t i) { out[i] = classify_user(tables[i], head_limit); });
  return out;
}

GroupDistribution group_cohort(std::span<const UserClassification> classifications) {
  if (classifications.empty()) throw ContractViolation("group_cohort: no classifications");
  int max_group = 1;
  for (const auto& c : classifications) max_group = std::max(max_group, c.group);
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_group) + 1, 0);
  for (const auto& c : classifications) ++counts[static_cast<std::size_t>(c.group)];

  GroupDistribution dist;
  dist.cohort_size = classifications.size();
  for (int g = 1; g <= max_group; ++g) {
    const std::size_t users = counts[static_cast<std::size_t>(g)];
    dist.groups.push_back(
        GroupCount{g, users, 100.0 * static_cast<double>(users) / static_cast<double>(dist.cohort_size)});
  }
  return dist;
}

}  // namespace htmob
