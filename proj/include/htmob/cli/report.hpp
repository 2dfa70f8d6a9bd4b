#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "htmob/cli/pipeline.hpp"

namespace htmob::cli {

inline constexpr int kReportSchemaVersion = 1;

struct NamedCurve {
  std::string name;
  CcdfCurve curve;
};

/// A report document plus the curves it references under `curves/`.
struct ReportBundle {
  nlohmann::ordered_json document;
  std::vector<NamedCurve> curves;
};

/// "EVP"/"OVP"/"MVP" for group 3, "class<c>" otherwise.
std::string class_label(int group, int cls);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

ReportBundle build_report(const Analysis& analysis, const RunConfig& config);
nlohmann::ordered_json comparison_document(const ComparisonReport& report, const RunConfig& config);
nlohmann::ordered_json to_json(const ComparisonReport& report);

/// Header `x,p` and one line per point.
void write_curve_csv(std::ostream& out, const CcdfCurve& curve);

/// Writes `report.json` and every curve file below `out_dir`.
void write_report_bundle(const ReportBundle& bundle, const std::string& out_dir);

/// Curves embedded in a saved report. Throws FormatError when the document
/// does not look like a report.
std::vector<NamedCurve> curves_from_report(const nlohmann::json& report);

/// Deterministic JSON text: two-space indent, trailing newline.
std::string dump(const nlohmann::ordered_json& j);

}  // namespace htmob::cli
