#include "htmob/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "htmob/detail/random.hpp"
#include "htmob/error.hpp"

namespace htmob {
namespace {

constexpr std::int64_t kMinGapSeconds = 120;
constexpr std::int64_t kMaxGapSeconds = 600;

std::string user_name(int index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "u%06d", index);
  return buf;
}

std::string place_name(int index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "p%05d", index);
  return buf;
}

void check_tier(const TierSpec& t, const char* name) {
  if (t.places < 0) throw ContractViolation(std::string("cohort spec: negative place count for ") + name);
  if (t.places == 0) return;
  if (!(t.p_min > 0.0 && t.p_min <= t.p_max && t.p_max <= 1.0)) {
    throw ContractViolation(std::string("cohort spec: visit probabilities for ") + name + " must satisfy 0 < min <= max <= 1");
  }
  if (!(t.stay_mean_seconds > 0.0) || t.stay_mean_seconds > 6.0 * 3600.0) {
    throw ContractViolation(std::string("cohort spec: stay mean for ") + name + " must lie in (0, 21600] seconds");
  }
}

int draw_evp_count(const CohortSpec& spec, std::mt19937_64& rng) {
  if (spec.evp_tail_exponent <= 1.0 || spec.evp.places == 0) return spec.evp.places;
  const double u = detail::unit(rng);
  const double x = spec.evp.places * std::pow(1.0 - u, -1.0 / (spec.evp_tail_exponent - 1.0));
  return static_cast<int>(std::min<double>(std::floor(x), spec.max_evp_places));
}

// Floyd's sampling of `count` distinct indices from [0, pool).
std::vector<int> sample_places(int pool, int count, std::mt19937_64& rng) {
  std::unordered_set<int> chosen;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = pool - count; j < pool; ++j) {
    const int t = static_cast<int>(detail::below(rng, static_cast<std::uint64_t>(j) + 1));
    const int pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  return out;
}

Channel draw_channel(const CohortSpec& spec, std::mt19937_64& rng) {
  const double total = spec.channel_mix[0] + spec.channel_mix[1] + spec.channel_mix[2];
  double u = detail::unit(rng) * total;
  if (u < spec.channel_mix[0]) return Channel::kCall;
  u -= spec.channel_mix[0];
  if (u < spec.channel_mix[1]) return Channel::kSms;
  return Channel::kData;
}

struct PlannedPlace {
  int place;
  PlaceLabel tier;
  double probability;
  double stay_mean;
};

}  // namespace

void CohortSpec::validate() const {
  if (user_count < 1 || user_count > 1000000) {
    throw ContractViolation("cohort spec: user_count must lie in [1, 1000000]");
  }
  if (window_days < 1) throw ContractViolation("cohort spec: window_days must be at least 1");
  check_tier(mvp, "mvp");
  check_tier(ovp, "ovp");
  check_tier(evp, "evp");
  if (mvp.places + ovp.places + evp.places < 1) throw ContractViolation("cohort spec: no places planted");
  if (max_evp_places < evp.places) throw ContractViolation("cohort spec: max_evp_places below evp place count");
  if (evp_tail_exponent != 0.0 && !(evp_tail_exponent > 1.0)) {
    throw ContractViolation("cohort spec: evp_tail_exponent must be 0 or greater than 1");
  }
  const int most = mvp.places + ovp.places + std::max(evp.places, evp_tail_exponent > 1.0 ? max_evp_places : 0);
  if (place_pool > 100000) throw ContractViolation("cohort spec: place_pool is limited to 100000 ids");
  if (place_pool < most) throw ContractViolation("cohort spec: place_pool smaller than the places a user may need");
  for (const double w : channel_mix) {
    if (!(w >= 0.0)) throw ContractViolation("cohort spec: channel weights must be non-negative");
  }
  if (!(channel_mix[0] + channel_mix[1] + channel_mix[2] > 0.0)) {
    throw ContractViolation("cohort spec: channel weights sum to zero");
  }
}

SyntheticCohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  SyntheticCohort cohort;
  // Intern every user before any place so ids are stable across modes.
  for (int u = 0; u < spec.user_count; ++u) cohort.symbols.intern(user_name(u));

  std::vector<PlannedPlace> plan;
  std::vector<std::size_t> todays;
  for (int u = 0; u < spec.user_count; ++u) {
    std::mt19937_64 rng(detail::mix_seed(spec.seed, static_cast<std::uint64_t>(u)));
    const SymbolId user = static_cast<SymbolId>(u);
    const int n_evp = draw_evp_count(spec, rng);
    const int total = spec.mvp.places + spec.ovp.places + n_evp;
    const auto picks = sample_places(spec.place_pool, total, rng);

    plan.clear();
    PlantedUser truth{user_name(u), 0, {}};
    int k = 0;
    auto plant = [&](const TierSpec& tier, int count, PlaceLabel label) {
      if (count > 0) ++truth.expected_ht_index;
      for (int i = 0; i < count; ++i, ++k) {
        plan.push_back(PlannedPlace{picks[static_cast<std::size_t>(k)], label,
                                    detail::uniform(rng, tier.p_min, tier.p_max), tier.stay_mean_seconds});
      }
    };
    plant(spec.mvp, spec.mvp.places, PlaceLabel::kMvp);
    plant(spec.ovp, spec.ovp.places, PlaceLabel::kOvp);
    plant(spec.evp, n_evp, PlaceLabel::kEvp);
    std::vector<std::size_t> by_name(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) by_name[i] = i;
    std::sort(by_name.begin(), by_name.end(),
              [&](std::size_t a, std::size_t b) { return plan[a].place < plan[b].place; });
    for (const std::size_t i : by_name) {
      truth.places.emplace_back(place_name(plan[i].place), plan[i].tier);
      truth.probability.push_back(plan[i].probability);
    }
    cohort.truth.users.push_back(std::move(truth));

    std::vector<SymbolId> place_ids(plan.size());
    for (std::size_t i = 0; i < plan.size(); ++i) place_ids[i] = cohort.symbols.intern(place_name(plan[i].place));

    for (int d = 0; d < spec.window_days; ++d) {
      const std::int64_t day_start = (std::int64_t{spec.start_day} + d) * kSecondsPerDay;
      todays.clear();
      for (std::size_t i = 0; i < plan.size(); ++i) {
        if (detail::unit(rng) < plan[i].probability) todays.push_back(i);
      }
      if (spec.mode == SynthMode::kCdr) {
        for (const std::size_t i : todays) {
          const auto offset = static_cast<std::int64_t>(detail::below(rng, kSecondsPerDay));
          cohort.events.push_back(Event{user, place_ids[i], Timestamp{std::chrono::seconds{day_start + offset}},
                                        draw_channel(spec, rng)});
        }
        continue;
      }

      // WiFi: shuffle the day's visits and lay them out back to back.
      for (std::size_t i = todays.size(); i > 1; --i) {
        std::swap(todays[i - 1], todays[detail::below(rng, i)]);
      }
      std::vector<std::int64_t> durations;
      std::vector<std::int64_t> gaps;
      std::int64_t used = 0;
      for (const std::size_t i : todays) {
        const auto dur = static_cast<std::int64_t>(std::llround(plan[i].stay_mean * detail::uniform(rng, 0.75, 1.25)));
        const auto gap = kMinGapSeconds + static_cast<std::int64_t>(
                                              detail::below(rng, kMaxGapSeconds - kMinGapSeconds + 1));
        if (used + dur + gap > kSecondsPerDay) break;
        durations.push_back(dur);
        gaps.push_back(gap);
        used += dur + gap;
      }
      std::int64_t cursor =
          day_start + static_cast<std::int64_t>(detail::below(rng, static_cast<std::uint64_t>(kSecondsPerDay - used) + 1));
      for (std::size_t v = 0; v < durations.size(); ++v) {
        const SymbolId ap = place_ids[todays[v]];
        cohort.assoc.push_back(AssocEvent{user, ap, Timestamp{std::chrono::seconds{cursor}}, AssocKind::kAssoc});
        cursor += durations[v];
        cohort.assoc.push_back(AssocEvent{user, ap, Timestamp{std::chrono::seconds{cursor}}, AssocKind::kDisassoc});
        cursor += gaps[v];
      }
    }
  }
  return cohort;
}

void write_truth_file(std::ostream& out, const PlantedTruth& truth) {
  out << "user_id,place_id,tier\n";
  for (const auto& user : truth.users) {
    for (const auto& [place, tier] : user.places) out << user.user << ',' << place << ',' << to_string(tier) << '\n';
  }
  if (!out) throw IoError("write failure on truth file");
}

PlantedTruth read_truth_file(std::istream& in) {
  if (!in) throw IoError("truth input stream is not readable");
  std::string line;
  if (!std::getline(in, line) || line.rfind("user_id,place_id,tier", 0) != 0) {
    throw FormatError("truth file: missing header 'user_id,place_id,tier'");
  }
  std::map<std::string, std::vector<std::pair<std::string, PlaceLabel>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = a == std::string::npos ? a : line.find(',', a + 1);
    if (b == std::string::npos || line.find(',', b + 1) != std::string::npos || a == 0 || b == a + 1) {
      throw FormatError("truth file: malformed row at line " + std::to_string(line_no));
    }
    const std::string tier = line.substr(b + 1);
    PlaceLabel label;
    if (tier == "EVP") {
      label = PlaceLabel::kEvp;
    } else if (tier == "OVP") {
      label = PlaceLabel::kOvp;
    } else if (tier == "MVP") {
      label = PlaceLabel::kMvp;
    } else {
      throw FormatError("truth file: unknown tier '" + tier + "' at line " + std::to_string(line_no));
    }
    rows[line.substr(0, a)].emplace_back(line.substr(a + 1, b - a - 1), label);
  }
  if (in.bad()) throw IoError("read failure on truth file");

  PlantedTruth truth;
  for (auto& [user, places] : rows) {
    std::sort(places.begin(), places.end());
    bool tiers[3] = {false, false, false};
    for (const auto& p : places) tiers[static_cast<int>(p.second)] = true;
    truth.users.push_back(PlantedUser{user, int{tiers[0]} + int{tiers[1]} + int{tiers[2]}, std::move(places)});
  }
  return truth;
}

RecoveryMetrics evaluate_recovery(std::span<const UserClassification> classifications, const SymbolTable& symbols,
                                  const PlantedTruth& truth) {
  std::map<std::string_view, const PlantedUser*> by_user;
  for (const auto& u : truth.users) by_user.emplace(u.user, &u);

  RecoveryMetrics m;
  for (const auto& c : classifications) {
    auto it = by_user.find(symbols.name(c.user));
    if (it == by_user.end()) {
      throw ContractViolation("evaluate_recovery: user '" + std::string(symbols.name(c.user)) + "' not in truth");
    }
    const PlantedUser& planted = *it->second;
    ++m.users;
    if (c.group == planted.expected_ht_index) ++m.ht_recovered;
    if (c.group != 3) continue;
    ++m.group3_users;
    for (const auto& p : c.places) {
      const std::string_view name = symbols.name(p.place);
      auto pt = std::lower_bound(planted.places.begin(), planted.places.end(), name,
                                 [](const auto& entry, std::string_view n) { return entry.first < n; });
      if (pt == planted.places.end() || pt->first != name) {
        throw ContractViolation("evaluate_recovery: place '" + std::string(name) + "' not planted for user '" +
                                planted.user + "'");
      }
      ++m.labeled_places;
      if (p.label && *p.label == pt->second) ++m.correct_labels;
    }
  }
  if (m.users > 0) m.ht_recovery_rate = static_cast<double>(m.ht_recovered) / static_cast<double>(m.users);
  if (m.labeled_places > 0) {
    m.label_accuracy = static_cast<double>(m.correct_labels) / static_cast<double>(m.labeled_places);
  }
  return m;
}

}  // namespace htmob
