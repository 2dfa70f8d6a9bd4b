#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <tuple>

#include "htmob/error.hpp"
#include "htmob/ingest.hpp"

using namespace htmob;
using std::chrono::seconds;

namespace {

Timestamp at(std::int64_t s) { return Timestamp{seconds{s}}; }

std::string render(const EventLog& log) {
  std::ostringstream out;
  write_event_file(out, log);
  return out.str();
}

}  // namespace

TEST(Time, EpochAndIso) {
  EXPECT_EQ(parse_epoch_seconds("1104537600"), at(1104537600));
  EXPECT_EQ(format_iso8601(at(1104537600)), "2005-01-01T00:00:00Z");
  EXPECT_EQ(parse_iso8601("2015-03-02T08:15:00Z", Timezone::utc()), at(1425284100));
  EXPECT_EQ(parse_iso8601("2015-03-02T09:15:00+01:00", Timezone::utc()), at(1425284100));
  EXPECT_EQ(parse_iso8601("2015-03-02T08:15:00.250Z", Timezone::utc()), at(1425284100));
  EXPECT_FALSE(parse_iso8601("2015-02-30T08:15:00Z", Timezone::utc()));
  EXPECT_FALSE(parse_iso8601("2015-03-02 08:15", Timezone::utc()));
  EXPECT_FALSE(parse_epoch_seconds("12a"));
  EXPECT_EQ(format_day(16496), "2015-03-02");
}

TEST(Time, LocalDaysFollowTimezone) {
  const auto rome = Timezone::parse("Europe/Rome");
  // 23:30Z on 2015-03-01 is already 2015-03-02 in Rome (UTC+1).
  const auto t = *parse_iso8601("2015-03-01T23:30:00Z", Timezone::utc());
  EXPECT_EQ(Timezone::utc().day_of(t), 16495);
  EXPECT_EQ(rome.day_of(t), 16496);
  EXPECT_EQ(rome.day_start(16496), at(1425250800));
  // Summer time: +02:00.
  EXPECT_EQ(rome.offset_at(*parse_iso8601("2015-07-01T12:00:00Z", Timezone::utc())), seconds{7200});
  // A local reading without designator.
  EXPECT_EQ(parse_iso8601("2015-03-02T00:00:00", rome), at(1425250800));

  const auto fixed = Timezone::parse("-05:00");
  EXPECT_EQ(fixed.day_of(at(3600)), -1);
  EXPECT_THROW(Timezone::parse("Mars/Olympus"), ConfigError);
  EXPECT_THROW(Timezone::parse("../etc/passwd"), ConfigError);
}

TEST(ParseCdr, WellFormedRow) {
  std::istringstream in("user_id,timestamp,place_id,channel\nu1,2015-03-02T08:15:00Z,cell_77,call\n");
  const auto r = parse_raw_cdr(in, {}, Timezone::utc());
  ASSERT_EQ(r.records.size(), 1u);
  const Event& e = r.records[0];
  EXPECT_EQ(r.symbols.name(e.user), "u1");
  EXPECT_EQ(r.symbols.name(e.place), "cell_77");
  EXPECT_EQ(format_iso8601(e.time), "2015-03-02T08:15:00Z");
  EXPECT_EQ(e.channel, Channel::kCall);
  EXPECT_EQ(r.malformed, 0u);
}

TEST(ParseCdr, ColumnMapAndDelimiter) {
  std::istringstream in("ch;cell;who;when\nsms;c9;alice;1104537600\n");
  CdrColumnMap m;
  m.user = "who";
  m.place = "cell";
  m.timestamp = "when";
  m.channel = "ch";
  m.delimiter = ';';
  const auto r = parse_raw_cdr(in, m, Timezone::utc());
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.symbols.name(r.records[0].user), "alice");
  EXPECT_EQ(r.records[0].channel, Channel::kSms);
}

TEST(ParseCdr, EmptyPlaceIsMalformed) {
  std::string text = "user_id,timestamp,place_id,channel\n";
  for (int i = 0; i < 19; ++i) text += "u1,2015-03-02T08:15:00Z,c1,call\n";
  text += "u1,2015-03-02T08:15:00Z,,call\n";
  std::istringstream in(text);
  const auto r = parse_raw_cdr(in, {}, Timezone::utc());
  EXPECT_EQ(r.records.size(), 19u);
  EXPECT_EQ(r.malformed, 1u);
  EXPECT_EQ(r.rows, 20u);
}

TEST(ParseCdr, EmptyStream) {
  std::istringstream none("");
  const auto r = parse_raw_cdr(none, {}, Timezone::utc());
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.malformed, 0u);
  std::istringstream header_only("user_id,timestamp,place_id,channel\n");
  EXPECT_TRUE(parse_raw_cdr(header_only, {}, Timezone::utc()).records.empty());
}

TEST(ParseCdr, TooManyMalformedRowsIsFatal) {
  std::string text = "user_id,timestamp,place_id,channel\n";
  for (int i = 0; i < 8; ++i) text += "u1,2015-03-02T08:15:00Z,c1,call\n";
  text += "u1,not-a-time,c1,call\nu1,2015-03-02T08:15:00Z,c1,fax\n";
  {
    std::istringstream in(text);
    EXPECT_NO_THROW(parse_raw_cdr(in, {}, Timezone::utc(), {.max_malformed_fraction = 0.2}));
  }
  std::istringstream in(text);
  EXPECT_THROW(parse_raw_cdr(in, {}, Timezone::utc()), FormatError);
}

TEST(ParseCdr, MissingColumnIsFormatError) {
  std::istringstream in("user_id,ap_id,timestamp,kind\nu9,ap1,1104537600,assoc\n");
  EXPECT_THROW(parse_raw_cdr(in, {}, Timezone::utc()), FormatError);
}

TEST(ParseCdr, WifiChannelOnlyInNormalized) {
  const std::string text = "user_id,timestamp,place_id,channel\nu1,2015-03-02T08:15:00Z,ap1,wifi\n";
  std::istringstream raw(text);
  EXPECT_THROW(parse_raw_cdr(raw, {}, Timezone::utc()), FormatError);
  std::istringstream norm(text);
  EXPECT_EQ(parse_normalized(norm, Timezone::utc()).records.size(), 1u);
}

TEST(ParseWifi, Rows) {
  std::istringstream in("user_id,ap_id,timestamp,kind\nu9,ap_lib_2,1104537600,assoc\n");
  const auto r = parse_raw_wifi(in, {}, Timezone::utc());
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.symbols.name(r.records[0].ap), "ap_lib_2");
  EXPECT_EQ(r.records[0].time, at(1104537600));
  EXPECT_EQ(r.records[0].kind, AssocKind::kAssoc);

  std::string text = "user_id,ap_id,timestamp,kind\n";
  for (int i = 0; i < 10; ++i) text += "u9,ap1,1104537600,disassoc\n";
  text += "u9,ap1,1104537600,roam\n";
  std::istringstream roam(text);
  const auto r2 = parse_raw_wifi(roam, {}, Timezone::utc());
  EXPECT_EQ(r2.records.size(), 10u);
  EXPECT_EQ(r2.malformed, 1u);

  std::istringstream empty("");
  EXPECT_TRUE(parse_raw_wifi(empty, {}, Timezone::utc()).records.empty());
}

TEST(Normalize, DedupAndWindow) {
  SymbolTable s;
  const auto u = s.intern("u1");
  const auto p = s.intern("p1");
  const Event e{u, p, at(1425284100), Channel::kCall};
  const auto log = normalize(s, {e, e});
  ASSERT_EQ(log.events.size(), 1u);
  ASSERT_TRUE(log.window);
  EXPECT_EQ(log.window->first, 16496);
  EXPECT_EQ(log.window->days(), 1);

  const auto empty = normalize(s, {});
  EXPECT_TRUE(empty.events.empty());
  EXPECT_FALSE(empty.window);
}

TEST(Normalize, IdempotentPermutationInvariantAndMatchesSortDedupOracle) {
  std::mt19937_64 rng(1);
  SymbolTable s;
  // Interned in non-sorted order on purpose.
  std::vector<SymbolId> users, places;
  for (int i = 9; i >= 0; --i) users.push_back(s.intern("u" + std::to_string(i)));
  for (int i = 0; i < 20; ++i) places.push_back(s.intern("p" + std::to_string((i * 7) % 20)));
  std::vector<Event> events;
  for (int i = 0; i < 1000; ++i) {
    events.push_back(Event{users[rng() % users.size()], places[rng() % places.size()],
                           at(1425254400 + static_cast<std::int64_t>(rng() % (86400 * 5))),
                           static_cast<Channel>(rng() % 3)});
    if (i % 10 == 0) events.push_back(events.back());
  }
  const auto base = normalize(s, events);

  // Oracle: sort on names, then drop adjacent duplicates.
  using Key = std::tuple<std::string, std::int64_t, std::string, int>;
  std::vector<Key> keys;
  for (const auto& e : events) {
    keys.emplace_back(std::string(s.name(e.user)), e.time.time_since_epoch().count(), std::string(s.name(e.place)),
                      static_cast<int>(e.channel));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  ASSERT_EQ(base.events.size(), keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Event& e = base.events[i];
    EXPECT_EQ(Key(std::string(base.symbols.name(e.user)), e.time.time_since_epoch().count(),
                  std::string(base.symbols.name(e.place)), static_cast<int>(e.channel)),
              keys[i]);
  }

  EXPECT_EQ(normalize(base.symbols, base.events), base);
  std::shuffle(events.begin(), events.end(), rng);
  EXPECT_EQ(normalize(s, events), base);
}

TEST(Normalize, RoundTripIsByteStable) {
  const std::string text =
      "user_id,timestamp,place_id,channel\n"
      "u2,2015-03-02T10:00:00Z,c1,sms\n"
      "u1,2015-03-02T08:15:00Z,cell_77,call\n"
      "u1,2015-03-02T08:15:00Z,cell_77,call\n"
      "u1,2015-03-03T08:15:00+01:00,c2,data\n";
  std::istringstream in(text);
  const auto log = normalize(parse_raw_cdr(in, {}, Timezone::utc()));
  const std::string once = render(log);
  std::istringstream again(once);
  const auto log2 = normalize(parse_normalized(again, Timezone::utc()));
  EXPECT_EQ(render(log2), once);
  EXPECT_EQ(log2, log);
  EXPECT_EQ(log.events.size(), 3u);
}

TEST(NormalizeWifi, DisassocBeforeAssocAtSameInstant) {
  std::istringstream in(
      "user_id,ap_id,timestamp,kind\n"
      "u1,ap2,1000,assoc\n"
      "u1,ap1,1000,disassoc\n"
      "u1,ap1,0,assoc\n");
  const auto log = normalize(parse_raw_wifi(in, {}, Timezone::utc()));
  ASSERT_EQ(log.events.size(), 3u);
  EXPECT_EQ(log.events[1].kind, AssocKind::kDisassoc);
  EXPECT_EQ(log.events[2].kind, AssocKind::kAssoc);
  std::ostringstream out;
  write_wifi_file(out, log);
  std::istringstream back(out.str());
  EXPECT_EQ(normalize(parse_raw_wifi(back, {}, Timezone::utc())), log);
}
