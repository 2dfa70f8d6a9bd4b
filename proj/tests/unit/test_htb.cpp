#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "htmob/error.hpp"
#include "htmob/htb.hpp"
#include "oracles.hpp"

using namespace htmob;

namespace {

RelevanceTable table_of(const std::vector<double>& rr) {
  RelevanceTable t{0, {}};
  for (std::size_t i = 0; i < rr.size(); ++i) {
    t.records.push_back(RelevanceRecord{static_cast<SymbolId>(i), 0, 0, rr[i]});
  }
  return t;
}

}  // namespace

TEST(HeadTailBreaks, AllEqualHasNoBreak) {
  const auto r = head_tail_breaks(std::vector<double>{1, 1, 1, 1});
  EXPECT_TRUE(r.breaks.empty());
  EXPECT_EQ(r.ht_index, 1);
  EXPECT_EQ(r.class_of, (std::vector<int>{1, 1, 1, 1}));
}

TEST(HeadTailBreaks, SingleOutlierStopsAfterOneBreak) {
  std::vector<double> v(9, 1.0);
  v.push_back(10.0);
  const auto r = head_tail_breaks(v);
  ASSERT_EQ(r.breaks.size(), 1u);
  EXPECT_EQ(r.breaks[0], 1.9);
  EXPECT_EQ(r.ht_index, 2);
  EXPECT_EQ(r.class_of.back(), 2);
  EXPECT_EQ(std::count(r.class_of.begin(), r.class_of.end(), 1), 9);
}

TEST(HeadTailBreaks, TwoLevelExampleMatchesExactRationals) {
  const std::vector<double> v{1, 1, 1, 1, 1, 1, 2, 2, 4, 8, 16, 32};
  const auto r = head_tail_breaks(v);
  ASSERT_EQ(r.breaks.size(), 2u);
  EXPECT_EQ(r.breaks[0], oracle::round_to_double(mpq_class(35, 6)));
  EXPECT_EQ(r.breaks[1], oracle::round_to_double(mpq_class(56, 3)));
  EXPECT_EQ(r.ht_index, 3);
  EXPECT_EQ(r.class_of, (std::vector<int>{1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 3}));
  EXPECT_DOUBLE_EQ(r.head_fractions[0], 0.25);
}

TEST(HeadTailBreaks, SingleValueIsGroupOne) {
  const auto r = head_tail_breaks(std::vector<double>{0.7});
  EXPECT_EQ(r.ht_index, 1);
  EXPECT_TRUE(r.breaks.empty());
}

TEST(HeadTailBreaks, RejectsBadInput) {
  EXPECT_THROW(head_tail_breaks(std::vector<double>{}), ContractViolation);
  EXPECT_THROW(head_tail_breaks(std::vector<double>{1.0, 0.0}), ContractViolation);
  EXPECT_THROW(head_tail_breaks(std::vector<double>{1.0, -2.0}), ContractViolation);
  EXPECT_THROW(head_tail_breaks(std::vector<double>{1.0, std::nan("")}), ContractViolation);
  EXPECT_THROW(head_tail_breaks(std::vector<double>{1.0}, 0.0), ContractViolation);
  EXPECT_THROW(head_tail_breaks(std::vector<double>{1.0}, 1.0), ContractViolation);
}

TEST(HeadTailBreaks, MajorityFirstSplitIsKeptButNotFollowed) {
  // Mean 2.5 leaves {3, 3, 3} in the head: share 0.75.
  const auto r = head_tail_breaks(std::vector<double>{1, 3, 3, 3});
  EXPECT_EQ(r.ht_index, 2);
  EXPECT_EQ(r.class_of, (std::vector<int>{1, 2, 2, 2}));
}

TEST(HeadTailBreaks, MatchesExactOracleOnRandomVectors) {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 2000; ++iter) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<double> v(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> u(0.001, 100.0);
    for (auto& x : v) x = iter % 2 ? u(rng) : static_cast<double>(1 + rng() % 6);
    const auto got = head_tail_breaks(v);
    const auto want = oracle::head_tail_breaks(v);
    ASSERT_EQ(got.breaks, want.breaks) << "iteration " << iter;
    ASSERT_EQ(got.class_of, want.class_of) << "iteration " << iter;
    ASSERT_EQ(got.ht_index, want.ht_index) << "iteration " << iter;
  }
}

TEST(HeadTailBreaks, OrderInvariant) {
  std::mt19937_64 rng(11);
  std::vector<double> v{0.03, 0.05, 0.02, 0.3, 0.35, 0.25, 0.9, 1.0, 0.01, 0.04};
  const auto base = head_tail_breaks(v);
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (int i = 0; i < 20; ++i) {
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> w(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) w[j] = v[idx[j]];
    const auto r = head_tail_breaks(w);
    EXPECT_EQ(r.breaks, base.breaks);
    for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(r.class_of[j], base.class_of[idx[j]]);
  }
}

TEST(HeadTailBreaks, AffineTiesStayInTail) {
  // 2 is exactly the mean; after scaling the rounded image may land a hair above.
  const std::vector<double> v{1, 2, 3};
  const auto base = head_tail_breaks(v);
  std::vector<double> w;
  for (double x : v) w.push_back(0.1 * x + 0.7);
  const auto r = head_tail_breaks(w);
  EXPECT_EQ(r.class_of, base.class_of);
  EXPECT_EQ(r.ht_index, base.ht_index);
}

TEST(ClassifyUser, FiftyFiveTwoIsGroupThree) {
  std::vector<double> rr(50, 0.03);
  rr.insert(rr.end(), 5, 0.3);
  rr.insert(rr.end(), 2, 1.0);
  const auto c = classify_user(table_of(rr));
  EXPECT_EQ(c.group, 3);
  EXPECT_TRUE(c.has_labels());
  for (const auto& p : c.places) {
    ASSERT_TRUE(p.label.has_value());
    if (p.rr == 1.0) EXPECT_EQ(*p.label, PlaceLabel::kMvp);
    if (p.rr == 0.3) EXPECT_EQ(*p.label, PlaceLabel::kOvp);
    if (p.rr == 0.03) EXPECT_EQ(*p.label, PlaceLabel::kEvp);
  }
}

TEST(ClassifyUser, SinglePlaceIsGroupOneWithoutLabels) {
  const auto c = classify_user(table_of({1.0}));
  EXPECT_EQ(c.group, 1);
  EXPECT_FALSE(c.has_labels());
  EXPECT_FALSE(c.places[0].label.has_value());
}

TEST(ClassifyUser, RecordOrderDoesNotMatter) {
  auto t = table_of({0.1, 0.5, 0.05, 1.0, 0.02, 0.03});
  const auto a = classify_user(t);
  std::reverse(t.records.begin(), t.records.end());
  EXPECT_EQ(classify_user(t), a);
}

TEST(ClassifyCohort, ParallelMatchesSerial) {
  std::mt19937_64 rng(3);
  std::vector<RelevanceTable> tables;
  for (SymbolId u = 0; u < 40; ++u) {
    auto t = table_of({});
    t.user = u;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      t.records.push_back(RelevanceRecord{static_cast<SymbolId>(i), 0, 0, (1 + rng() % 60) / 60.0});
    }
    tables.push_back(t);
  }
  EXPECT_EQ(classify_cohort(tables, kDefaultHeadLimit, 4), classify_cohort(tables, kDefaultHeadLimit, 1));
}

TEST(GroupCohort, AllSinglePlaceUsersAreGroupOne) {
  std::vector<UserClassification> cs;
  for (SymbolId u = 0; u < 5; ++u) {
    auto t = table_of({0.4});
    t.user = u;
    cs.push_back(classify_user(t));
  }
  const auto d = group_cohort(cs);
  EXPECT_EQ(d.cohort_size, 5u);
  ASSERT_EQ(d.groups.size(), 1u);
  EXPECT_EQ(d.groups[0].group, 1);
  EXPECT_DOUBLE_EQ(d.groups[0].percent, 100.0);
}

TEST(GroupCohort, IncludesEmptyIntermediateGroupsAndSumsToCohort) {
  std::vector<double> g3(50, 0.03);
  g3.insert(g3.end(), 5, 0.3);
  g3.insert(g3.end(), 2, 1.0);
  std::vector<UserClassification> cs{classify_user(table_of({1.0})), classify_user(table_of(g3))};
  const auto d = group_cohort(cs);
  ASSERT_EQ(d.groups.size(), 3u);
  EXPECT_EQ(d.groups[1].users, 0u);
  double pct = 0;
  std::size_t users = 0;
  for (const auto& g : d.groups) {
    pct += g.percent;
    users += g.users;
  }
  EXPECT_NEAR(pct, 100.0, 0.01);
  EXPECT_EQ(users, 2u);
  EXPECT_THROW(group_cohort(std::vector<UserClassification>{}), ContractViolation);
}
