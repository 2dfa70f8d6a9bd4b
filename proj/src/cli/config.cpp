#include "htmob/cli/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "htmob/error.hpp"

namespace htmob::cli {
namespace {

using json = nlohmann::json;

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

// Strict key dispatch: every key of `j` must have a handler.
void dispatch(const json& j, const std::map<std::string, std::function<void(const json&)>>& handlers,
              const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be an object");
  for (const auto& [key, value] : j.items()) {
    auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError("unknown " + what + " key '" + key + "'");
    it->second(value);
  }
}

json read_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + what + " '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " '" + path + "' is not valid JSON: " + e.what());
  }
}

template <typename Enum>
Enum parse_enum(std::string_view text, std::initializer_list<std::pair<std::string_view, Enum>> table,
                std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "'");
}

nlohmann::ordered_json tier_json(const TierSpec& t) {
  nlohmann::ordered_json j;
  j["places"] = t.places;
  j["p_min"] = t.p_min;
  j["p_max"] = t.p_max;
  j["stay_mean_seconds"] = t.stay_mean_seconds;
  return j;
}

TierSpec tier_from_json(const json& j, TierSpec base, const std::string& name) {
  dispatch(j,
           {{"places", [&](const json& v) { base.places = get_as<int>(v, name + ".places"); }},
            {"p_min", [&](const json& v) { base.p_min = get_as<double>(v, name + ".p_min"); }},
            {"p_max", [&](const json& v) { base.p_max = get_as<double>(v, name + ".p_max"); }},
            {"stay_mean_seconds",
             [&](const json& v) { base.stay_mean_seconds = get_as<double>(v, name + ".stay_mean_seconds"); }}},
           "tier '" + name + "'");
  return base;
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kCdr: return "cdr";
    case DatasetKind::kWifi: return "wifi";
    case DatasetKind::kNormalized: return "normalized";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  return parse_enum<DatasetKind>(
      text, {{"cdr", DatasetKind::kCdr}, {"wifi", DatasetKind::kWifi}, {"normalized", DatasetKind::kNormalized}},
      "dataset kind");
}

std::string_view to_string(TimestampFormat format) {
  switch (format) {
    case TimestampFormat::kAuto: return "auto";
    case TimestampFormat::kIso8601: return "iso8601";
    case TimestampFormat::kEpoch: return "epoch";
  }
  return "?";
}

TimestampFormat parse_timestamp_format(std::string_view text) {
  return parse_enum<TimestampFormat>(
      text,
      {{"auto", TimestampFormat::kAuto}, {"iso8601", TimestampFormat::kIso8601}, {"epoch", TimestampFormat::kEpoch}},
      "timestamp format");
}

std::string_view to_string(ActiveUserMode mode) { return mode == ActiveUserMode::kStrict ? "strict" : "fraction"; }

ActiveUserMode parse_active_mode(std::string_view text) {
  return parse_enum<ActiveUserMode>(text, {{"strict", ActiveUserMode::kStrict}, {"fraction", ActiveUserMode::kFraction}},
                                    "active-user mode");
}

std::string_view to_string(DTotalMode mode) {
  return mode == DTotalMode::kActiveDays ? "active-days" : "window-span";
}

DTotalMode parse_d_total_mode(std::string_view text) {
  return parse_enum<DTotalMode>(
      text, {{"active-days", DTotalMode::kActiveDays}, {"window-span", DTotalMode::kWindowSpan}}, "d_total mode");
}

std::string_view to_string(Averaging averaging) { return averaging == Averaging::kMacro ? "macro" : "micro"; }

Averaging parse_averaging(std::string_view text) {
  return parse_enum<Averaging>(text, {{"macro", Averaging::kMacro}, {"micro", Averaging::kMicro}}, "averaging mode");
}

std::string_view to_string(SynthMode mode) { return mode == SynthMode::kCdr ? "cdr" : "wifi"; }

SynthMode parse_synth_mode(std::string_view text) {
  return parse_enum<SynthMode>(text, {{"cdr", SynthMode::kCdr}, {"wifi", SynthMode::kWifi}}, "synth mode");
}

void RunConfig::validate() const {
  if (!(max_malformed_fraction >= 0.0 && max_malformed_fraction <= 1.0)) {
    throw ConfigError("max_malformed_fraction must lie in [0, 1]");
  }
  if (min_pause_seconds < 0) throw ConfigError("min_pause_seconds must be non-negative");
  if (merge_gap_seconds < 0) throw ConfigError("merge_gap_seconds must be non-negative");
  if (!(head_limit > 0.0 && head_limit < 1.0)) throw ConfigError("head_limit must lie in (0, 1)");
  if (!(active_fraction > 0.0 && active_fraction <= 1.0)) throw ConfigError("active_fraction must lie in (0, 1]");
  if (kmeans_k < 1) throw ConfigError("kmeans_k must be at least 1");
  if (kmeans_restarts < 1) throw ConfigError("kmeans_restarts must be at least 1");
  if (!(kmeans_tol >= 0.0)) throw ConfigError("kmeans_tol must be non-negative");
  if (kmeans_max_iter < 1) throw ConfigError("kmeans_max_iter must be at least 1");
  if (workers < 1 || workers > 256) throw ConfigError("workers must lie in [1, 256]");
  Timezone::parse(timezone);
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["inputs"] = c.inputs;
  j["kind"] = to_string(c.kind);
  j["timezone"] = c.timezone;
  j["timestamp_format"] = to_string(c.timestamp_format);
  j["max_malformed_fraction"] = c.max_malformed_fraction;
  j["min_pause_seconds"] = c.min_pause_seconds;
  j["merge_gap_seconds"] = c.merge_gap_seconds;
  j["head_limit"] = c.head_limit;
  j["active_mode"] = to_string(c.active_mode);
  j["active_fraction"] = c.active_fraction;
  j["d_total_mode"] = to_string(c.d_total_mode);
  j["averaging"] = to_string(c.averaging);
  j["kmeans_k"] = c.kmeans_k;
  j["kmeans_restarts"] = c.kmeans_restarts;
  j["kmeans_tol"] = c.kmeans_tol;
  j["kmeans_max_iter"] = c.kmeans_max_iter;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir;
  j["emit_normalized"] = c.emit_normalized;
  return j;
}

RunConfig apply_json(const json& j, RunConfig c) {
  auto str = [](const json& v, const std::string& key) { return get_as<std::string>(v, key); };
  dispatch(j,
           {{"inputs", [&](const json& v) { c.inputs = get_as<std::vector<std::string>>(v, "inputs"); }},
            {"kind", [&](const json& v) { c.kind = parse_dataset_kind(str(v, "kind")); }},
            {"timezone", [&](const json& v) { c.timezone = str(v, "timezone"); }},
            {"timestamp_format",
             [&](const json& v) { c.timestamp_format = parse_timestamp_format(str(v, "timestamp_format")); }},
            {"max_malformed_fraction",
             [&](const json& v) { c.max_malformed_fraction = get_as<double>(v, "max_malformed_fraction"); }},
            {"min_pause_seconds",
             [&](const json& v) { c.min_pause_seconds = get_as<std::int64_t>(v, "min_pause_seconds"); }},
            {"merge_gap_seconds",
             [&](const json& v) { c.merge_gap_seconds = get_as<std::int64_t>(v, "merge_gap_seconds"); }},
            {"head_limit", [&](const json& v) { c.head_limit = get_as<double>(v, "head_limit"); }},
            {"active_mode", [&](const json& v) { c.active_mode = parse_active_mode(str(v, "active_mode")); }},
            {"active_fraction", [&](const json& v) { c.active_fraction = get_as<double>(v, "active_fraction"); }},
            {"d_total_mode", [&](const json& v) { c.d_total_mode = parse_d_total_mode(str(v, "d_total_mode")); }},
            {"averaging", [&](const json& v) { c.averaging = parse_averaging(str(v, "averaging")); }},
            {"kmeans_k", [&](const json& v) { c.kmeans_k = get_as<int>(v, "kmeans_k"); }},
            {"kmeans_restarts", [&](const json& v) { c.kmeans_restarts = get_as<int>(v, "kmeans_restarts"); }},
            {"kmeans_tol", [&](const json& v) { c.kmeans_tol = get_as<double>(v, "kmeans_tol"); }},
            {"kmeans_max_iter", [&](const json& v) { c.kmeans_max_iter = get_as<int>(v, "kmeans_max_iter"); }},
            {"seed", [&](const json& v) { c.seed = get_as<std::uint64_t>(v, "seed"); }},
            {"workers", [&](const json& v) { c.workers = get_as<unsigned>(v, "workers"); }},
            {"out_dir", [&](const json& v) { c.out_dir = str(v, "out_dir"); }},
            {"emit_normalized", [&](const json& v) { c.emit_normalized = str(v, "emit_normalized"); }}},
           "config");
  return c;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  json j = read_json_file(path, "config file");
  // A saved report carries its run configuration under "config".
  if (j.is_object() && j.contains("schema") && j.contains("config")) j = j["config"];
  return apply_json(j, std::move(base));
}

nlohmann::ordered_json to_json(const CohortSpec& s) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(s.mode);
  j["user_count"] = s.user_count;
  j["window_days"] = s.window_days;
  j["mvp"] = tier_json(s.mvp);
  j["ovp"] = tier_json(s.ovp);
  j["evp"] = tier_json(s.evp);
  j["evp_tail_exponent"] = s.evp_tail_exponent;
  j["max_evp_places"] = s.max_evp_places;
  j["channel_mix"] = s.channel_mix;
  j["place_pool"] = s.place_pool;
  j["start_day"] = format_day(s.start_day);
  j["seed"] = s.seed;
  return j;
}

CohortSpec cohort_spec_from_json(const json& j, CohortSpec s) {
  dispatch(j,
           {{"mode", [&](const json& v) { s.mode = parse_synth_mode(get_as<std::string>(v, "mode")); }},
            {"user_count", [&](const json& v) { s.user_count = get_as<int>(v, "user_count"); }},
            {"window_days", [&](const json& v) { s.window_days = get_as<int>(v, "window_days"); }},
            {"mvp", [&](const json& v) { s.mvp = tier_from_json(v, s.mvp, "mvp"); }},
            {"ovp", [&](const json& v) { s.ovp = tier_from_json(v, s.ovp, "ovp"); }},
            {"evp", [&](const json& v) { s.evp = tier_from_json(v, s.evp, "evp"); }},
            {"evp_tail_exponent", [&](const json& v) { s.evp_tail_exponent = get_as<double>(v, "evp_tail_exponent"); }},
            {"max_evp_places", [&](const json& v) { s.max_evp_places = get_as<int>(v, "max_evp_places"); }},
            {"channel_mix", [&](const json& v) { s.channel_mix = get_as<std::array<double, 3>>(v, "channel_mix"); }},
            {"place_pool", [&](const json& v) { s.place_pool = get_as<int>(v, "place_pool"); }},
            {"start_day",
             [&](const json& v) {
               auto t = parse_iso8601(get_as<std::string>(v, "start_day") + "T00:00:00Z", Timezone::utc());
               if (!t) throw ConfigError("start_day must be YYYY-MM-DD");
               s.start_day = Timezone::utc().day_of(*t);
             }},
            {"seed", [&](const json& v) { s.seed = get_as<std::uint64_t>(v, "seed"); }}},
           "cohort spec");
  try {
    s.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  return s;
}

CohortSpec load_cohort_spec(const std::string& path) {
  return cohort_spec_from_json(read_json_file(path, "cohort spec"));
}

}  // namespace htmob::cli
