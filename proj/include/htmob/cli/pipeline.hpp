#pragma once

#include <optional>
#include <vector>

#include "htmob/analytics.hpp"
#include "htmob/cli/config.hpp"

namespace htmob::cli {

/// Dataset shape before and after preprocessing.
struct DatasetSummary {
  DatasetKind kind = DatasetKind::kCdr;
  std::size_t input_rows = 0;
  std::size_t malformed_rows = 0;
  std::size_t users_before = 0;
  std::size_t users_after = 0;
  std::optional<DayWindow> window;
  std::size_t pois = 0;
  // WiFi only.
  std::size_t sessions = 0;
  std::size_t orphan_disassocs = 0;
  std::size_t trailing_closed = 0;
  std::size_t significant_stays = 0;
};

/// Output of ingest, preprocess, relevance and classification.
struct Analysis {
  DatasetSummary summary;
  SymbolTable symbols;
  Timezone timezone;
  /// Significant stays (WiFi only).
  std::vector<Stay> stays;
  std::vector<RelevanceTable> tables;
  std::vector<UserClassification> classifications;
};

/// Runs the per-user stages for `config`. Writes the preprocessed log to
/// `config.emit_normalized` when set. Throws ContractViolation when no user
/// survives preprocessing.
Analysis run_pipeline(const RunConfig& config);

/// Preprocessed WiFi stays as interchange events: one `wifi` row per day a
/// stay touches, stamped at the later of the stay start and the day start.
EventLog stays_to_event_log(const SymbolTable& symbols, std::span<const Stay> stays, const Timezone& tz);

}  // namespace htmob::cli
