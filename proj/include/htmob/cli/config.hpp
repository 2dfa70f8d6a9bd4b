#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "htmob/analytics.hpp"
#include "htmob/ingest.hpp"
#include "htmob/preprocess.hpp"
#include "htmob/synth.hpp"

namespace htmob::cli {

enum class DatasetKind { kCdr, kWifi, kNormalized };

/// Everything that determines an analysis run. Echoed verbatim into reports.
struct RunConfig {
  std::vector<std::string> inputs;
  DatasetKind kind = DatasetKind::kCdr;
  std::string timezone = "UTC";
  TimestampFormat timestamp_format = TimestampFormat::kAuto;
  double max_malformed_fraction = 0.10;
  std::int64_t min_pause_seconds = 900;
  std::int64_t merge_gap_seconds = 60;
  double head_limit = kDefaultHeadLimit;
  ActiveUserMode active_mode = ActiveUserMode::kStrict;
  double active_fraction = 1.0;
  DTotalMode d_total_mode = DTotalMode::kActiveDays;
  Averaging averaging = Averaging::kMacro;
  int kmeans_k = 3;
  int kmeans_restarts = 16;
  double kmeans_tol = 1e-9;
  int kmeans_max_iter = 200;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string out_dir = "htmob-out";
  /// Optional path for the preprocessed event log in interchange format.
  std::string emit_normalized;

  KMeansOptions kmeans() const { return {kmeans_k, kmeans_restarts, kmeans_tol, kmeans_max_iter, seed}; }
  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
/// Applies the keys present in `j` on top of `base`. Unknown keys, wrong
/// types and bad enum spellings raise ConfigError.
RunConfig apply_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

nlohmann::ordered_json to_json(const CohortSpec& spec);
CohortSpec cohort_spec_from_json(const nlohmann::json& j, CohortSpec base = {});
CohortSpec load_cohort_spec(const std::string& path);

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);
std::string_view to_string(TimestampFormat format);
TimestampFormat parse_timestamp_format(std::string_view text);
std::string_view to_string(ActiveUserMode mode);
ActiveUserMode parse_active_mode(std::string_view text);
std::string_view to_string(DTotalMode mode);
DTotalMode parse_d_total_mode(std::string_view text);
std::string_view to_string(Averaging averaging);
Averaging parse_averaging(std::string_view text);
std::string_view to_string(SynthMode mode);
SynthMode parse_synth_mode(std::string_view text);

}  // namespace htmob::cli
