#include "htmob/cli/report.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "htmob/error.hpp"

namespace htmob::cli {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string curve_file(const std::string& name) { return "curves/" + name + ".csv"; }

ojson curve_entry(const std::string& name, const std::string& kind, std::optional<int> group, std::optional<int> cls,
                  const CcdfCurve& curve) {
  ojson j;
  j["name"] = name;
  j["file"] = curve_file(name);
  j["kind"] = kind;
  j["group"] = group ? ojson(*group) : ojson(nullptr);
  j["class"] = cls ? ojson(*cls) : ojson(nullptr);
  ojson points = ojson::array();
  for (const auto& p : curve.points) points.push_back(ojson::array({p.x, p.p}));
  j["points"] = std::move(points);
  return j;
}

std::vector<int> present_groups(const GroupDistribution& dist) {
  std::vector<int> out;
  for (const auto& g : dist.groups) {
    if (g.users > 0) out.push_back(g.group);
  }
  return out;
}

std::string now_iso8601() {
  return format_iso8601(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

ojson tool_json() {
  ojson j;
  j["name"] = "htmob";
  j["version"] = HTMOB_VERSION;
  return j;
}

}  // namespace

std::string class_label(int group, int cls) {
  if (group == 3 && cls >= 1 && cls <= 3) return std::string(to_string(static_cast<PlaceLabel>(cls - 1)));
  return "class" + std::to_string(cls);
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

ojson to_json(const ComparisonReport& r) {
  ojson j;
  j["users"] = r.users;
  j["kmeans_k"] = r.kmeans_k;
  j["htb_classified"] = r.htb_classified;
  j["kmeans_classified"] = r.kmeans_classified;
  j["htb_coverage"] = r.htb_coverage;
  j["kmeans_coverage"] = r.kmeans_coverage;
  j["common_users"] = r.common_users;
  j["agreement"] = r.agreement ? ojson(*r.agreement) : ojson(nullptr);
  j["kmeans_method"] = "reference reimplementation";
  return j;
}

ReportBundle build_report(const Analysis& a, const RunConfig& config) {
  ReportBundle bundle;
  ojson& doc = bundle.document;
  auto add_curve = [&](ojson& list, const std::string& name, const std::string& kind, std::optional<int> group,
                       std::optional<int> cls, const CcdfCurve& curve) {
    list.push_back(curve_entry(name, kind, group, cls, curve));
    bundle.curves.push_back(NamedCurve{name, curve});
    return curve_file(name);
  };

  doc["schema"] = "htmob.report";
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = tool_json();
  doc["generated_at"] = now_iso8601();
  doc["config"] = to_json(config);

  const auto& s = a.summary;
  ojson dataset;
  dataset["kind"] = to_string(s.kind);
  dataset["input_rows"] = s.input_rows;
  dataset["malformed_rows"] = s.malformed_rows;
  dataset["users_before"] = s.users_before;
  dataset["users_after"] = s.users_after;
  if (s.window) {
    dataset["days"] = s.window->days();
    dataset["window"] = ojson{{"first", format_day(s.window->first)}, {"last", format_day(s.window->last)}};
  } else {
    dataset["days"] = 0;
    dataset["window"] = nullptr;
  }
  dataset["pois"] = s.pois;
  if (s.kind == DatasetKind::kWifi) {
    dataset["stays"] = ojson{{"sessions", s.sessions},
                             {"orphan_disassocs", s.orphan_disassocs},
                             {"trailing_closed", s.trailing_closed},
                             {"significant", s.significant_stays}};
  }
  doc["dataset"] = std::move(dataset);

  const auto dist = group_cohort(a.classifications);
  ojson groups;
  groups["cohort_size"] = dist.cohort_size;
  groups["rows"] = ojson::array();
  for (const auto& g : dist.groups) {
    groups["rows"].push_back(ojson{{"group", g.group}, {"users", g.users}, {"percent", g.percent}});
  }
  doc["groups"] = std::move(groups);

  ojson curves = ojson::array();
  {
    std::vector<double> all;
    for (const auto& t : a.tables) {
      for (const auto& r : t.records) all.push_back(r.rr);
    }
    add_curve(curves, "rr_all", "rr", std::nullopt, std::nullopt, ccdf(all));
  }

  ojson compositions = ojson::array();
  ojson poi_counts = ojson::array();
  ojson rr_classes = ojson::array();
  for (const int g : present_groups(dist)) {
    const auto comp = class_composition(a.classifications, g, config.averaging);
    ojson c;
    c["group"] = g;
    c["users"] = comp.users;
    c["averaging"] = to_string(comp.averaging);
    c["classes"] = ojson::array();
    for (int k = 1; k <= g; ++k) {
      c["classes"].push_back(ojson{{"class", k}, {"label", class_label(g, k)}, {"percent", comp.percent[k - 1]}});
    }
    compositions.push_back(std::move(c));

    const auto rr = class_rr_distributions(a.classifications, g);
    ojson r;
    r["group"] = g;
    r["users"] = rr.users;
    r["classes"] = ojson::array();
    for (int k = 1; k <= g; ++k) {
      const auto& curve = rr.classes[static_cast<std::size_t>(k - 1)];
      const std::string name = "rr_g" + std::to_string(g) + "_c" + std::to_string(k);
      r["classes"].push_back(ojson{{"class", k}, {"label", class_label(g, k)},
                                   {"curve", add_curve(curves, name, "rr", g, k, curve)}});
    }
    rr_classes.push_back(std::move(r));

    const auto counts = distinct_poi_counts(a.classifications, g);
    ojson p;
    p["group"] = g;
    p["users"] = counts.users;
    p["classes"] = ojson::array();
    for (int k = 1; k <= g; ++k) {
      const auto& per_user = counts.counts[static_cast<std::size_t>(k - 1)];
      std::vector<double> samples(per_user.begin(), per_user.end());
      const std::string name = "poi_count_g" + std::to_string(g) + "_c" + std::to_string(k);
      p["classes"].push_back(ojson{{"class", k},
                                   {"label", class_label(g, k)},
                                   {"mean", compensated_sum(samples) / static_cast<double>(samples.size())},
                                   {"curve", add_curve(curves, name, "poi_count", g, k,
                                                       counts.curves[static_cast<std::size_t>(k - 1)])}});
    }
    poi_counts.push_back(std::move(p));
  }
  doc["compositions"] = std::move(compositions);
  doc["rr_distributions"] = std::move(rr_classes);
  doc["distinct_pois"] = std::move(poi_counts);

  constexpr int kPauseGroup = 3;
  if (s.kind == DatasetKind::kWifi && !a.stays.empty()) {
    const auto pause = pause_time_analysis(a.stays, a.classifications, kPauseGroup);
    ojson pt;
    pt["group"] = kPauseGroup;
    pt["pairs"] = pause.pairs;
    pt["spearman_rho"] = pause.spearman_rho ? ojson(*pause.spearman_rho) : ojson(nullptr);
    pt["classes"] = ojson::array();
    for (int k = 1; k <= kPauseGroup; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      const std::string name = "pause_g3_c" + std::to_string(k);
      pt["classes"].push_back(ojson{{"class", k},
                                    {"label", class_label(kPauseGroup, k)},
                                    {"stays", pause.stays[idx]},
                                    {"mean_duration_s", pause.mean_duration[idx]},
                                    {"curve", add_curve(curves, name, "pause_seconds", kPauseGroup, k,
                                                        pause.duration_ccdf[idx])}});
    }
    doc["pause_time"] = std::move(pt);
  } else {
    doc["pause_time"] = nullptr;
  }

  doc["comparison"] = to_json(compare_htb_kmeans(a.tables, a.classifications, config.kmeans(), config.workers));
  doc["curves"] = std::move(curves);
  return bundle;
}

ojson comparison_document(const ComparisonReport& report, const RunConfig& config) {
  ojson doc;
  doc["schema"] = "htmob.comparison";
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = tool_json();
  doc["generated_at"] = now_iso8601();
  doc["config"] = to_json(config);
  doc["comparison"] = to_json(report);
  return doc;
}

void write_curve_csv(std::ostream& out, const CcdfCurve& curve) {
  out << "x,p\n";
  for (const auto& p : curve.points) out << format_number(p.x) << ',' << format_number(p.p) << '\n';
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

void write_report_bundle(const ReportBundle& bundle, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "curves", ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
  for (const auto& c : bundle.curves) {
    const fs::path path = fs::path(out_dir) / curve_file(c.name);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_curve_csv(out, c.curve);
    if (!out) throw IoError("write failure on '" + path.string() + "'");
  }
  const fs::path path = fs::path(out_dir) / "report.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << dump(bundle.document);
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::vector<NamedCurve> curves_from_report(const nlohmann::json& report) {
  if (!report.is_object() || report.value("schema", "") != "htmob.report" || !report.contains("curves") ||
      !report["curves"].is_array()) {
    throw FormatError("document is not an htmob report");
  }
  std::vector<NamedCurve> out;
  try {
    for (const auto& c : report["curves"]) {
      NamedCurve nc{c.at("name").get<std::string>(), {}};
      if (nc.name.empty() || nc.name.find_first_of("/\\.") != std::string::npos) {
        throw FormatError("invalid curve name '" + nc.name + "'");
      }
      for (const auto& p : c.at("points")) {
        nc.curve.points.push_back(CcdfPoint{p.at(0).get<double>(), p.at(1).get<double>()});
      }
      out.push_back(std::move(nc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed curve entry: ") + e.what());
  }
  return out;
}

}  // namespace htmob::cli
