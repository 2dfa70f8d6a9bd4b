#include "htmob/time.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "htmob/error.hpp"

namespace htmob {
namespace {

using std::chrono::seconds;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// Parses "HH:MM" or "HHMM" or "HH" into seconds.
std::optional<std::int64_t> parse_hhmm(std::string_view text) {
  int hh = 0;
  int mm = 0;
  if (text.size() == 2) {
    if (!parse_int(text, hh)) return std::nullopt;
  } else if (text.size() == 4) {
    if (!parse_int(text.substr(0, 2), hh) || !parse_int(text.substr(2, 2), mm)) return std::nullopt;
  } else if (text.size() == 5 && text[2] == ':') {
    if (!parse_int(text.substr(0, 2), hh) || !parse_int(text.substr(3, 2), mm)) return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59) return std::nullopt;
  return std::int64_t{hh} * 3600 + std::int64_t{mm} * 60;
}

std::optional<std::int64_t> parse_signed_offset(std::string_view text) {
  if (text.empty() || (text[0] != '+' && text[0] != '-')) return std::nullopt;
  auto magnitude = parse_hhmm(text.substr(1));
  if (!magnitude) return std::nullopt;
  return text[0] == '-' ? -*magnitude : *magnitude;
}

std::int64_t read_be(const unsigned char* p, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | p[i];
  if (width == 4) return static_cast<std::int32_t>(static_cast<std::uint32_t>(v));
  return static_cast<std::int64_t>(v);
}

struct TzifData {
  std::vector<std::int64_t> transitions;
  std::vector<std::int64_t> offsets;
  std::int64_t initial_offset = 0;
};

// Reads a TZif file, preferring the 64-bit data block of version 2+ files.
std::optional<TzifData> read_tzif(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = 44;
  auto header_ok = [&](std::size_t at) {
    return bytes.size() >= at + kHeader && bytes[at] == 'T' && bytes[at + 1] == 'Z' && bytes[at + 2] == 'i' &&
           bytes[at + 3] == 'f';
  };
  if (!header_ok(0)) return std::nullopt;

  struct Counts {
    std::int64_t isut, isstd, leap, time, type, chars;
  };
  auto counts_at = [&](std::size_t at) {
    const unsigned char* p = bytes.data() + at + 20;
    return Counts{read_be(p, 4), read_be(p + 4, 4), read_be(p + 8, 4),
                  read_be(p + 12, 4), read_be(p + 16, 4), read_be(p + 20, 4)};
  };
  auto block_size = [](const Counts& c, int width) {
    return static_cast<std::size_t>(c.time * width + c.time + c.type * 6 + c.chars + c.leap * (width + 4) + c.isstd +
                                    c.isut);
  };

  std::size_t at = 0;
  int width = 4;
  Counts counts = counts_at(0);
  if (bytes[4] >= '2') {
    const std::size_t second = kHeader + block_size(counts, 4);
    if (!header_ok(second)) return std::nullopt;
    at = second;
    width = 8;
    counts = counts_at(second);
  }
  const std::size_t data = at + kHeader;
  if (bytes.size() < data + block_size(counts, width) || counts.type < 1) return std::nullopt;

  const unsigned char* times = bytes.data() + data;
  const unsigned char* indices = times + counts.time * width;
  const unsigned char* types = indices + counts.time;

  auto type_offset = [&](std::size_t idx) { return read_be(types + idx * 6, 4); };

  TzifData out;
  out.initial_offset = type_offset(0);
  for (std::int64_t i = 0; i < counts.time; ++i) {
    const std::size_t idx = indices[i];
    if (static_cast<std::int64_t>(idx) >= counts.type) return std::nullopt;
    out.transitions.push_back(read_be(times + i * width, width));
    out.offsets.push_back(type_offset(idx));
  }
  return out;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::optional<std::int64_t> civil_days(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

Timezone Timezone::fixed(std::string name, std::chrono::seconds offset) {
  Timezone tz;
  tz.name_ = std::move(name);
  tz.base_offset_ = offset.count();
  return tz;
}

Timezone Timezone::parse(std::string_view spec) {
  if (spec.empty() || spec == "UTC" || spec == "Z" || spec == "Etc/UTC" || spec == "GMT") return utc();
  std::string_view rest = spec;
  if (rest.rfind("UTC", 0) == 0 && rest.size() > 3) rest.remove_prefix(3);
  if (auto off = parse_signed_offset(rest)) {
    return fixed(std::string(spec), seconds{*off});
  }
  const bool safe_name =
      std::all_of(spec.begin(), spec.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '/' || c == '_' || c == '-' || c == '+';
      }) &&
      spec.find("..") == std::string_view::npos && spec.front() != '/';
  if (safe_name) {
    if (auto data = read_tzif("/usr/share/zoneinfo/" + std::string(spec))) {
      Timezone tz;
      tz.name_ = std::string(spec);
      tz.base_offset_ = data->initial_offset;
      tz.transitions_ = std::move(data->transitions);
      tz.offsets_ = std::move(data->offsets);
      return tz;
    }
  }
  throw ConfigError("unknown timezone '" + std::string(spec) + "'");
}

std::chrono::seconds Timezone::offset_at(Timestamp t) const {
  if (transitions_.empty()) return seconds{base_offset_};
  const std::int64_t s = t.time_since_epoch().count();
  auto it = std::upper_bound(transitions_.begin(), transitions_.end(), s);
  if (it == transitions_.begin()) return seconds{base_offset_};
  return seconds{offsets_[static_cast<std::size_t>(it - transitions_.begin() - 1)]};
}

Day Timezone::day_of(Timestamp t) const {
  const std::int64_t local = t.time_since_epoch().count() + offset_at(t).count();
  return static_cast<Day>(floor_div(local, kSecondsPerDay));
}

Timestamp Timezone::day_start(Day d) const {
  // Smallest t with day_of(t) >= d; local days are monotone in t outside
  // backward transitions that straddle midnight.
  std::int64_t lo = std::int64_t{d} * kSecondsPerDay - 2 * kSecondsPerDay;
  std::int64_t hi = std::int64_t{d} * kSecondsPerDay + 2 * kSecondsPerDay;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (day_of(Timestamp{seconds{mid}}) >= d) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return Timestamp{seconds{lo}};
}

Timestamp Timezone::from_local(std::int64_t local_seconds) const {
  const std::int64_t guess = local_seconds - offset_at(Timestamp{seconds{local_seconds}}).count();
  return Timestamp{seconds{local_seconds - offset_at(Timestamp{seconds{guess}}).count()}};
}

std::optional<Timestamp> parse_iso8601(std::string_view text, const Timezone& tz) {
  // YYYY-MM-DDTHH:MM:SS is 19 characters.
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d) ||
      !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  auto days = civil_days(y, mo, d);
  if (!days) return std::nullopt;

  std::string_view rest = text.substr(19);
  if (!rest.empty() && rest[0] == '.') {
    std::size_t n = 1;
    while (n < rest.size() && std::isdigit(static_cast<unsigned char>(rest[n]))) ++n;
    if (n == 1) return std::nullopt;
    rest.remove_prefix(n);
  }
  const std::int64_t wall = *days * kSecondsPerDay + std::int64_t{h} * 3600 + std::int64_t{mi} * 60 + s;
  if (rest.empty()) return tz.from_local(wall);
  if (rest == "Z") return Timestamp{seconds{wall}};
  if (auto off = parse_signed_offset(rest)) return Timestamp{seconds{wall - *off}};
  return std::nullopt;
}

std::optional<Timestamp> parse_epoch_seconds(std::string_view text) {
  std::int64_t v = 0;
  if (!parse_int(text, v)) return std::nullopt;
  return Timestamp{seconds{v}};
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto dp = floor<days>(t);
  const year_month_day ymd{dp};
  const hh_mm_ss<seconds> hms{t - dp};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_day(Day d) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{d}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace htmob
