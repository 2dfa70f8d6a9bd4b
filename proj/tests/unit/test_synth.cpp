#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "htmob/error.hpp"
#include "htmob/relevance.hpp"
#include "htmob/synth.hpp"

using namespace htmob;

namespace {

std::string cdr_bytes(const CohortSpec& spec) {
  auto c = generate_cohort(spec);
  std::ostringstream out;
  write_event_file(out, normalize(c.symbols, std::move(c.events)));
  write_truth_file(out, c.truth);
  return out.str();
}

std::vector<UserClassification> classify_events(const SyntheticCohort& c, EventLog& log) {
  log = normalize(c.symbols, c.events);
  const auto tables = cohort_relevance(log);
  return classify_cohort(tables);
}

}  // namespace

TEST(Synth, ProbabilityOnePlaceHasFullRelevance) {
  CohortSpec spec;
  spec.user_count = 1;
  spec.window_days = 10;
  spec.mvp = {1, 1.0, 1.0, 3600};
  spec.ovp = {0, 0.2, 0.4, 3600};
  spec.evp = {0, 0.01, 0.05, 1800};
  const auto c = generate_cohort(spec);
  EXPECT_EQ(c.events.size(), 10u);
  const auto tables = cohort_relevance(normalize(c.symbols, c.events));
  ASSERT_EQ(tables.size(), 1u);
  EXPECT_EQ(tables[0].records[0].rr, 1.0);
  EXPECT_EQ(c.truth.users[0].expected_ht_index, 1);
}

TEST(Synth, DeterministicAndSeedSensitive) {
  CohortSpec spec;
  spec.user_count = 30;
  EXPECT_EQ(cdr_bytes(spec), cdr_bytes(spec));
  CohortSpec other = spec;
  other.seed = 43;
  EXPECT_NE(std::hash<std::string>{}(cdr_bytes(spec)), std::hash<std::string>{}(cdr_bytes(other)));

  spec.mode = SynthMode::kWifi;
  const auto a = generate_cohort(spec);
  const auto b = generate_cohort(spec);
  EXPECT_EQ(a.assoc, b.assoc);
}

TEST(Synth, InvalidSpecThrows) {
  CohortSpec spec;
  spec.window_days = 0;
  EXPECT_THROW(generate_cohort(spec), ContractViolation);
  spec = {};
  spec.ovp.p_min = 0.0;
  EXPECT_THROW(generate_cohort(spec), ContractViolation);
  spec = {};
  spec.evp.places = -1;
  EXPECT_THROW(generate_cohort(spec), ContractViolation);
}

TEST(Synth, EmpiricalRelevanceConcentratesOnPlantedProbability) {
  CohortSpec spec;
  spec.user_count = 40;
  spec.window_days = 365;
  const auto c = generate_cohort(spec);
  const auto log = normalize(c.symbols, c.events);
  const auto tables = cohort_relevance(log, DTotalMode::kWindowSpan);
  std::size_t places = 0;
  std::size_t close = 0;
  for (const auto& t : tables) {
    const auto& planted = *std::find_if(c.truth.users.begin(), c.truth.users.end(),
                                        [&](const PlantedUser& u) { return u.user == log.symbols.name(t.user); });
    for (std::size_t i = 0; i < planted.places.size(); ++i) {
      const auto id = log.symbols.find(planted.places[i].first);
      double rr = 0.0;
      if (id) {
        for (const auto& r : t.records) {
          if (r.place == *id) rr = r.rr;
        }
      }
      ++places;
      if (std::abs(rr - planted.probability[i]) <= 0.05) ++close;
    }
  }
  EXPECT_GE(static_cast<double>(close) / static_cast<double>(places), 0.99);
}

TEST(Synth, NoDuplicateSameDayVisits) {
  CohortSpec spec;
  spec.user_count = 20;
  const auto c = generate_cohort(spec);
  const auto log = normalize(c.symbols, c.events);
  std::set<std::tuple<SymbolId, SymbolId, Day>> seen;
  for (const auto& e : log.events) {
    EXPECT_TRUE(seen.insert({e.user, e.place, log.timezone.day_of(e.time)}).second);
  }
}

TEST(Synth, WifiStaysDoNotOverlap) {
  CohortSpec spec;
  spec.mode = SynthMode::kWifi;
  spec.user_count = 10;
  const auto c = generate_cohort(spec);
  ASSERT_EQ(c.assoc.size() % 2, 0u);
  for (std::size_t i = 0; i + 1 < c.assoc.size(); i += 2) {
    EXPECT_EQ(c.assoc[i].kind, AssocKind::kAssoc);
    EXPECT_EQ(c.assoc[i + 1].kind, AssocKind::kDisassoc);
    EXPECT_LT(c.assoc[i].time, c.assoc[i + 1].time);
    if (i + 2 < c.assoc.size() && c.assoc[i + 2].user == c.assoc[i].user) {
      EXPECT_LT(c.assoc[i + 1].time, c.assoc[i + 2].time);
    }
  }
}

TEST(Synth, TruthFileRoundTrip) {
  CohortSpec spec;
  spec.user_count = 5;
  const auto c = generate_cohort(spec);
  std::stringstream io;
  write_truth_file(io, c.truth);
  const auto back = read_truth_file(io);
  ASSERT_EQ(back.users.size(), c.truth.users.size());
  for (std::size_t i = 0; i < back.users.size(); ++i) {
    EXPECT_EQ(back.users[i].user, c.truth.users[i].user);
    EXPECT_EQ(back.users[i].places, c.truth.users[i].places);
    EXPECT_EQ(back.users[i].expected_ht_index, 3);
  }
  std::istringstream bad("user_id,place_id,tier\nu1,p1,XVP\n");
  EXPECT_THROW(read_truth_file(bad), FormatError);
}

TEST(Recovery, IdentityIsPerfect) {
  CohortSpec spec;
  spec.user_count = 20;
  const auto c = generate_cohort(spec);
  SymbolTable symbols = c.symbols;
  std::vector<UserClassification> fed;
  for (const auto& u : c.truth.users) {
    UserClassification uc;
    uc.user = *symbols.find(u.user);
    uc.group = u.expected_ht_index;
    for (const auto& [place, tier] : u.places) {
      uc.places.push_back(PlaceClass{*symbols.find(place), 0.5, static_cast<int>(tier) + 1, tier});
    }
    fed.push_back(uc);
  }
  const auto m = evaluate_recovery(fed, symbols, c.truth);
  EXPECT_EQ(m.ht_recovery_rate, 1.0);
  EXPECT_EQ(m.label_accuracy, 1.0);

  SymbolTable extra = symbols;
  UserClassification stranger;
  stranger.user = extra.intern("nobody");
  stranger.group = 1;
  fed.push_back(stranger);
  EXPECT_THROW(evaluate_recovery(fed, extra, c.truth), ContractViolation);
}

TEST(Recovery, ShuffledLabelsFallToChance) {
  CohortSpec spec;
  spec.user_count = 200;
  const auto c = generate_cohort(spec);
  EventLog log;
  auto cs = classify_events(c, log);
  // Expected accuracy of a within-user permutation: each place matches with
  // probability (labels equal to its tier) / (user's places).
  double expected = 0.0;
  std::size_t labeled = 0;
  std::mt19937_64 rng(21);
  for (auto& u : cs) {
    if (u.group != 3) continue;
    const auto& planted = *std::find_if(c.truth.users.begin(), c.truth.users.end(),
                                        [&](const PlantedUser& p) { return p.user == log.symbols.name(u.user); });
    std::vector<std::optional<PlaceLabel>> labels;
    for (const auto& p : u.places) labels.push_back(p.label);
    for (const auto& p : u.places) {
      const auto name = log.symbols.name(p.place);
      const auto tier = std::find_if(planted.places.begin(), planted.places.end(),
                                     [&](const auto& e) { return e.first == name; })
                            ->second;
      expected += static_cast<double>(std::count(labels.begin(), labels.end(), tier)) /
                  static_cast<double>(labels.size());
      ++labeled;
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t i = 0; i < labels.size(); ++i) u.places[i].label = labels[i];
  }
  const auto m = evaluate_recovery(cs, log.symbols, c.truth);
  const double chance = expected / static_cast<double>(labeled);
  EXPECT_EQ(m.labeled_places, labeled);
  EXPECT_NEAR(m.label_accuracy, chance, 0.03);
}
