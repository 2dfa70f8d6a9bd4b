#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "htmob/cli/report.hpp"
#include "htmob/synth.hpp"

namespace htmob::cli {

/// Runs the full pipeline and writes `report.json` plus curve files into
/// `config.out_dir`. Returns the report document.
nlohmann::ordered_json cmd_analyze(const RunConfig& config);

/// Writes the dataset file (`events.csv` or `wifi.csv`), `truth.csv` and
/// `cohort_spec.json` into `out_dir`.
void cmd_synth(const CohortSpec& spec, const std::string& out_dir);

/// Runs both classifiers and writes `comparison.json` into `config.out_dir`.
nlohmann::ordered_json cmd_compare(const RunConfig& config);

/// Rewrites the curve files referenced by a saved report into `out_dir`.
std::size_t cmd_report(const std::string& report_path, const std::string& out_dir);

/// Command-line entry point. Errors go to `err` as one `tag: message` line;
/// the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace htmob::cli
