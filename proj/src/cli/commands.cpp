#include "htmob/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "htmob/error.hpp"

namespace htmob::cli {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

// Flags that mirror RunConfig. Unset flags leave file/default values alone.
struct RunFlags {
  std::string config_file;
  std::vector<std::string> inputs;
  std::optional<std::string> kind, timezone, timestamp_format, active_mode, d_total, averaging, out_dir,
      emit_normalized;
  std::optional<double> max_malformed, head_limit, active_fraction, kmeans_tol;
  std::optional<std::int64_t> min_pause, merge_gap;
  std::optional<int> kmeans_k, kmeans_restarts, kmeans_max_iter;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config_file, "JSON config file (a saved report also works)");
    app.add_option("-i,--input", inputs, "Input file(s)");
    app.add_option("-k,--kind", kind, "cdr | wifi | normalized");
    app.add_option("--timezone", timezone, "Timezone for day boundaries (UTC, +01:00, Europe/Rome)");
    app.add_option("--timestamp-format", timestamp_format, "auto | iso8601 | epoch");
    app.add_option("--max-malformed", max_malformed, "Tolerated share of malformed rows");
    app.add_option("--min-pause", min_pause, "Minimum significant stay in seconds (strict >)");
    app.add_option("--merge-gap", merge_gap, "Merge same-AP stays separated by at most this many seconds");
    app.add_option("--head-limit", head_limit, "Head share allowed for head/tail recursion");
    app.add_option("--active-mode", active_mode, "strict | fraction");
    app.add_option("--active-fraction", active_fraction, "Share of window days required in fraction mode");
    app.add_option("--d-total", d_total, "active-days | window-span");
    app.add_option("--averaging", averaging, "macro | micro");
    app.add_option("--kmeans-k", kmeans_k, "Clusters for the k-means baseline");
    app.add_option("--kmeans-restarts", kmeans_restarts, "k-means restarts");
    app.add_option("--kmeans-tol", kmeans_tol, "k-means relative convergence tolerance");
    app.add_option("--kmeans-max-iter", kmeans_max_iter, "k-means iteration cap");
    app.add_option("--seed", seed, "Seed for the k-means baseline");
    app.add_option("-j,--workers", workers, "Worker threads for per-user stages");
    app.add_option("-o,--out-dir", out_dir, "Output directory");
    app.add_option("--emit-normalized", emit_normalized, "Also write the preprocessed log to this path");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config_file.empty()) c = load_config_file(config_file, c);
    if (!inputs.empty()) c.inputs = inputs;
    if (kind) c.kind = parse_dataset_kind(*kind);
    if (timezone) c.timezone = *timezone;
    if (timestamp_format) c.timestamp_format = parse_timestamp_format(*timestamp_format);
    if (max_malformed) c.max_malformed_fraction = *max_malformed;
    if (min_pause) c.min_pause_seconds = *min_pause;
    if (merge_gap) c.merge_gap_seconds = *merge_gap;
    if (head_limit) c.head_limit = *head_limit;
    if (active_mode) c.active_mode = parse_active_mode(*active_mode);
    if (active_fraction) c.active_fraction = *active_fraction;
    if (d_total) c.d_total_mode = parse_d_total_mode(*d_total);
    if (averaging) c.averaging = parse_averaging(*averaging);
    if (kmeans_k) c.kmeans_k = *kmeans_k;
    if (kmeans_restarts) c.kmeans_restarts = *kmeans_restarts;
    if (kmeans_tol) c.kmeans_tol = *kmeans_tol;
    if (kmeans_max_iter) c.kmeans_max_iter = *kmeans_max_iter;
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    if (out_dir) c.out_dir = *out_dir;
    if (emit_normalized) c.emit_normalized = *emit_normalized;
    c.validate();
    return c;
  }
};

}  // namespace

nlohmann::ordered_json cmd_analyze(const RunConfig& config) {
  const Analysis analysis = run_pipeline(config);
  ReportBundle bundle = build_report(analysis, config);
  write_report_bundle(bundle, config.out_dir);
  return std::move(bundle.document);
}

void cmd_synth(const CohortSpec& spec, const std::string& out_dir) {
  SyntheticCohort cohort = generate_cohort(spec);
  ensure_dir(out_dir);
  const fs::path dir(out_dir);
  if (spec.mode == SynthMode::kCdr) {
    const EventLog log = normalize(cohort.symbols, std::move(cohort.events));
    std::ofstream out(dir / "events.csv", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir / "events.csv").string() + "'");
    write_event_file(out, log);
  } else {
    WifiParse parsed{std::move(cohort.symbols), std::move(cohort.assoc), 0, 0};
    const AssocLog log = normalize(std::move(parsed));
    std::ofstream out(dir / "wifi.csv", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir / "wifi.csv").string() + "'");
    write_wifi_file(out, log);
  }
  {
    std::ofstream out(dir / "truth.csv", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (dir / "truth.csv").string() + "'");
    write_truth_file(out, cohort.truth);
  }
  write_text(dir / "cohort_spec.json", dump(to_json(spec)));
}

nlohmann::ordered_json cmd_compare(const RunConfig& config) {
  const Analysis analysis = run_pipeline(config);
  const auto report = compare_htb_kmeans(analysis.tables, analysis.classifications, config.kmeans(), config.workers);
  auto doc = comparison_document(report, config);
  ensure_dir(config.out_dir);
  write_text(fs::path(config.out_dir) / "comparison.json", dump(doc));
  return doc;
}

std::size_t cmd_report(const std::string& report_path, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) throw IoError("cannot open report '" + report_path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("report '" + report_path + "' is not valid JSON: " + e.what());
  }
  const auto curves = curves_from_report(doc);
  ensure_dir((fs::path(out_dir) / "curves").string());
  for (const auto& c : curves) {
    const fs::path path = fs::path(out_dir) / "curves" / (c.name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_curve_csv(out, c.curve);
  }
  return curves.size();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Head/tail breaks analytics for mobility traces", "htmob"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HTMOB_VERSION);

  RunFlags analyze_flags;
  auto* analyze = app.add_subcommand("analyze", "Run the full pipeline and write a report with curve files");
  analyze_flags.attach(*analyze);

  RunFlags compare_flags;
  auto* compare = app.add_subcommand("compare", "Compare head/tail classes with the k-means baseline");
  compare_flags.attach(*compare);

  std::string spec_file;
  std::optional<std::uint64_t> synth_seed;
  std::optional<std::string> synth_mode;
  std::optional<int> synth_users, synth_days;
  std::string synth_out = "htmob-synth";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort with planted relevance tiers");
  synth->add_option("-s,--spec", spec_file, "JSON cohort spec (defaults apply when omitted)");
  synth->add_option("--seed", synth_seed, "Override the spec seed");
  synth->add_option("--mode", synth_mode, "cdr | wifi");
  synth->add_option("--users", synth_users, "Override user_count");
  synth->add_option("--days", synth_days, "Override window_days");
  synth->add_option("-o,--out-dir", synth_out, "Output directory");

  std::string report_file;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Re-render curve files from a saved report");
  report->add_option("-r,--report", report_file, "Saved report.json")->required();
  report->add_option("-o,--out-dir", report_out, "Output directory (defaults to the report's directory)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    try {
      app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForVersion&) {
      out << HTMOB_VERSION << "\n";
      return 0;
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }

    if (analyze->parsed()) {
      const RunConfig config = analyze_flags.resolve();
      const auto doc = cmd_analyze(config);
      out << "wrote " << (fs::path(config.out_dir) / "report.json").string() << " ("
          << doc["groups"]["cohort_size"].get<std::size_t>() << " users)\n";
    } else if (compare->parsed()) {
      const RunConfig config = compare_flags.resolve();
      cmd_compare(config);
      out << "wrote " << (fs::path(config.out_dir) / "comparison.json").string() << "\n";
    } else if (synth->parsed()) {
      CohortSpec spec = spec_file.empty() ? CohortSpec{} : load_cohort_spec(spec_file);
      if (synth_seed) spec.seed = *synth_seed;
      if (synth_mode) spec.mode = parse_synth_mode(*synth_mode);
      if (synth_users) spec.user_count = *synth_users;
      if (synth_days) spec.window_days = *synth_days;
      try {
        spec.validate();
      } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
      }
      cmd_synth(spec, synth_out);
      out << "wrote synthetic cohort to " << synth_out << "\n";
    } else if (report->parsed()) {
      const std::string dir = report_out.empty() ? fs::path(report_file).parent_path().string() : report_out;
      const auto n = cmd_report(report_file, dir.empty() ? "." : dir);
      out << "wrote " << n << " curve files\n";
    }
    return 0;
  } catch (const Error& e) {
    err << e.tag() << ": " << one_line(e.what()) << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "internal_error: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace htmob::cli
