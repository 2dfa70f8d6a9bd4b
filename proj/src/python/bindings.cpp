#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "htmob/analytics.hpp"
#include "htmob/cli/commands.hpp"
#include "htmob/cli/config.hpp"
#include "htmob/error.hpp"
#include "htmob/htb.hpp"
#include "htmob/relevance.hpp"
#include "htmob/synth.hpp"

namespace py = pybind11;
using namespace htmob;

#define HTMOB_STR(x) #x
#define HTMOB_XSTR(x) HTMOB_STR(x)

namespace {

py::dict htb_dict(const HtbResult& r) {
  py::dict d;
  d["breaks"] = r.breaks;
  d["ht_index"] = r.ht_index;
  d["class_of"] = r.class_of;
  d["head_fractions"] = r.head_fractions;
  return d;
}

std::optional<std::string> label_name(const std::optional<PlaceLabel>& label) {
  if (!label) return std::nullopt;
  return std::string(to_string(*label));
}

// visits: (place, day) pairs of one user.
std::vector<py::dict> relevance(const std::vector<std::pair<std::string, int>>& visits, const std::string& d_total,
                                std::optional<std::pair<int, int>> window) {
  if (visits.empty()) throw ContractViolation("relevance: no visits");
  SymbolTable symbols;
  const SymbolId user = symbols.intern("");
  std::vector<Visit> list;
  Day lo = visits.front().second;
  Day hi = lo;
  for (const auto& [place, day] : visits) {
    list.push_back(Visit{user, symbols.intern(place), day, day});
    lo = std::min(lo, day);
    hi = std::max(hi, day);
  }
  std::sort(list.begin(), list.end(), [](const Visit& a, const Visit& b) {
    return std::tie(a.place, a.first_day) < std::tie(b.place, b.first_day);
  });
  const DayWindow w = window ? DayWindow{window->first, window->second} : DayWindow{lo, hi};
  const auto profile = activity_profile(list, w, cli::parse_d_total_mode(d_total));
  const auto table = relevance_table(list, profile);
  std::vector<py::dict> out;
  for (const auto& r : table.records) {
    py::dict d;
    d["place"] = std::string(symbols.name(r.place));
    d["d_visit"] = r.d_visit;
    d["d_total"] = r.d_total;
    d["rr"] = r.rr;
    out.push_back(std::move(d));
  }
  return out;
}

// rr: place -> relevance ratio of one user.
py::dict classify(const std::map<std::string, double>& rr, double head_limit) {
  SymbolTable symbols;
  RelevanceTable table{symbols.intern(""), {}};
  for (const auto& [place, value] : rr) table.records.push_back(RelevanceRecord{symbols.intern(place), 0, 0, value});
  const auto c = classify_user(table, head_limit);
  py::dict places;
  for (const auto& p : c.places) {
    places[py::str(std::string(symbols.name(p.place)))] = py::make_tuple(p.cls, label_name(p.label));
  }
  py::dict d;
  d["group"] = c.group;
  d["breaks"] = c.htb.breaks;
  d["places"] = places;
  return d;
}

py::dict cohort_summary(const std::string& spec_json) {
  const auto spec = cli::cohort_spec_from_json(nlohmann::json::parse(spec_json));
  const auto c = generate_cohort(spec);
  std::map<int, std::size_t> groups;
  for (const auto& u : c.truth.users) ++groups[u.expected_ht_index];
  py::dict d;
  d["users"] = c.truth.users.size();
  d["events"] = c.events.size();
  d["assoc_events"] = c.assoc.size();
  d["expected_groups"] = groups;
  return d;
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::run_cli(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relevance ratio, head/tail breaks and mobility cohort analytics";
  m.attr("__version__") = HTMOB_XSTR(VERSION_INFO);

  auto base = py::register_exception<Error>(m, "HtmobError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());

  m.def(
      "head_tail_breaks",
      [](const std::vector<double>& values, double head_limit) { return htb_dict(head_tail_breaks(values, head_limit)); },
      py::arg("values"), py::arg("head_limit") = kDefaultHeadLimit,
      "Recursive head/tail breaks. Returns breaks, ht_index, class_of (1 = lowest) and head_fractions.");

  m.def(
      "ccdf",
      [](const std::vector<double>& samples) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : ccdf(samples).points) out.emplace_back(p.x, p.p);
        return out;
      },
      py::arg("samples"), "Empirical P(X > x) at each distinct sample value.");

  m.def(
      "kmeans_1d",
      [](const std::vector<double>& values, int k, int restarts, std::uint64_t seed) {
        KMeansOptions o;
        o.k = k;
        o.restarts = restarts;
        o.seed = seed;
        const auto r = kmeans_1d(values, o);
        py::dict d;
        d["centroids"] = r.centroids;
        d["cluster_of"] = r.cluster_of;
        d["objective"] = r.objective;
        return d;
      },
      py::arg("values"), py::arg("k") = 3, py::arg("restarts") = 16, py::arg("seed") = 0);

  m.def(
      "spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); },
      py::arg("x"), py::arg("y"));
  m.def(
      "rand_index", [](const std::vector<int>& a, const std::vector<int>& b) { return rand_index(a, b); },
      py::arg("a"), py::arg("b"));

  m.def("relevance", &relevance, py::arg("visits"), py::arg("d_total") = "active-days",
        py::arg("window") = py::none(),
        "Relevance table of one user from (place, day) visits; days are integers since the epoch.");
  m.def("classify", &classify, py::arg("rr"), py::arg("head_limit") = kDefaultHeadLimit,
        "Head/tail classes of one user's places from a place -> rr mapping.");
  m.def("cohort_summary", &cohort_summary, py::arg("spec_json") = "{}",
        "Generates a synthetic cohort from a JSON spec and returns its size and planted groups.");
  m.def("run_cli", &run_cli, py::arg("args"), "Runs the command-line tool in process; returns (code, stdout, stderr).");
}
