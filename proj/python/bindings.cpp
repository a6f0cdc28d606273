#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "agingscope/aging.hpp"
#include "agingscope/error.hpp"
#include "agingscope/groupstats.hpp"
#include "agingscope/ingest.hpp"
#include "agingscope/synth.hpp"
#include "agingscope/trend.hpp"

namespace py = pybind11;
using namespace agingscope;

namespace {

model::MetricSeries series_from(const std::vector<double>& t, const std::vector<double>& values) {
  return model::make_series("python", "value", t, values);
}

std::vector<double> default_times(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
  return t;
}

py::dict test_dict(const trend::TestResult& r) {
  py::dict d;
  d["name"] = std::string(trend::to_string(r.name));
  d["statistic"] = r.statistic;
  d["p_value"] = r.p_value ? py::cast(*r.p_value) : py::none();
  d["decision"] = std::string(trend::to_string(r.decision));
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trend, group comparison and aging projections for Android measurement series";

  static py::exception<Error> error_type(m, "AgingscopeError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      py::set_error(error_type, exc);
    }
  });

  // --- trend ---
  py::class_<trend::MannKendallStats>(m, "MannKendall")
      .def_readonly("s", &trend::MannKendallStats::s)
      .def_readonly("var_s", &trend::MannKendallStats::var_s)
      .def_readonly("variance_factor", &trend::MannKendallStats::variance_factor)
      .def_readonly("z", &trend::MannKendallStats::z)
      .def_readonly("p_value", &trend::MannKendallStats::p_value)
      .def_readonly("exact", &trend::MannKendallStats::exact);

  py::class_<trend::SenSlope>(m, "SenSlope")
      .def_readonly("slope", &trend::SenSlope::slope)
      .def_readonly("ci_low", &trend::SenSlope::ci_low)
      .def_readonly("ci_high", &trend::SenSlope::ci_high)
      .def_readonly("intercept", &trend::SenSlope::intercept);

  py::class_<trend::TrendVerdict>(m, "TrendVerdict")
      .def_readonly("n", &trend::TrendVerdict::n)
      .def_property_readonly("route", [](const trend::TrendVerdict& v) { return std::string(trend::to_string(v.route)); })
      .def_readonly("dw_statistic", &trend::TrendVerdict::dw_statistic)
      .def_property_readonly("tests",
                             [](const trend::TrendVerdict& v) {
                               py::list out;
                               for (const auto& t : v.tests) out.append(test_dict(t));
                               return out;
                             })
      .def_readonly("declared", &trend::TrendVerdict::declared)
      .def_readonly("slope", &trend::TrendVerdict::slope)
      .def_readonly("ci_low", &trend::TrendVerdict::ci_low)
      .def_readonly("ci_high", &trend::TrendVerdict::ci_high)
      .def_readonly("intercept", &trend::TrendVerdict::intercept)
      .def("__repr__", [](const trend::TrendVerdict& v) {
        return "<TrendVerdict n=" + std::to_string(v.n) + " declared=" + (v.declared ? "True" : "False") +
               " slope=" + std::to_string(v.slope) + ">";
      });

  m.def(
      "mann_kendall",
      [](const std::vector<double>& x) { return trend::mann_kendall_stats(x); }, py::arg("values"));
  m.def(
      "mann_kendall_hamed_rao",
      [](const std::vector<double>& x, std::optional<std::vector<double>> t) {
        const auto times = t ? *t : default_times(x.size());
        return trend::mann_kendall_hamed_rao_stats(times, x);
      },
      py::arg("values"), py::arg("times") = py::none());
  m.def(
      "sen_slope",
      [](const std::vector<double>& t, const std::vector<double>& x, double alpha) {
        return trend::sen_slope(t, x, trend::Alpha(alpha));
      },
      py::arg("times"), py::arg("values"), py::arg("alpha") = 0.05);
  m.def(
      "detect_trend",
      [](const std::vector<double>& t, const std::vector<double>& x, double alpha) {
        return trend::detect_trend(series_from(t, x), trend::Alpha(alpha));
      },
      py::arg("times"), py::arg("values"), py::arg("alpha") = 0.05);

  // --- groupstats ---
  py::class_<groupstats::GroupComparison>(m, "GroupComparison")
      .def_readonly("shapiro_p", &groupstats::GroupComparison::shapiro_p)
      .def_readonly("normal", &groupstats::GroupComparison::normal)
      .def_readonly("levene_p", &groupstats::GroupComparison::levene_p)
      .def_readonly("homoscedastic", &groupstats::GroupComparison::homoscedastic)
      .def_property_readonly(
          "test", [](const groupstats::GroupComparison& c) { return std::string(groupstats::to_string(c.routed_test)); })
      .def_readonly("statistic", &groupstats::GroupComparison::statistic)
      .def_readonly("p_value", &groupstats::GroupComparison::p_value)
      .def_readonly("significant", &groupstats::GroupComparison::significant);

  m.def(
      "route_test",
      [](double shapiro_p, double levene_p, double alpha) {
        return std::string(groupstats::to_string(groupstats::route_test(shapiro_p, levene_p, trend::Alpha(alpha))));
      },
      py::arg("shapiro_p"), py::arg("levene_p"), py::arg("alpha") = 0.05);
  m.def(
      "compare_groups",
      [](const std::map<std::string, std::vector<double>>& groups, const std::string& factor, double alpha) {
        groupstats::GroupedSlopes g;
        g.factor = model::parse_factor(factor);
        g.groups = groups;
        return groupstats::compare_groups(g, trend::Alpha(alpha));
      },
      py::arg("groups"), py::arg("factor") = "DEV", py::arg("alpha") = 0.05);
  m.def(
      "spearman_correlation",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = groupstats::spearman_correlation(x, y);
        return py::make_tuple(r.rho, r.p_value);
      },
      py::arg("x"), py::arg("y"));

  // --- ingest ---
  m.def(
      "parse_displayed_line",
      [](const std::string& line, double t) -> py::object {
        const auto e = ingest::parse_displayed_line(line, t);
        if (!e) return py::none();
        py::dict d;
        d["t"] = e->t;
        d["activity"] = e->activity;
        d["launch_time_ms"] = e->launch_time_ms;
        return d;
      },
      py::arg("line"), py::arg("t") = 0.0);
  m.def(
      "parse_gc_line",
      [](const std::string& line, double t, const std::string& process) -> py::object {
        const auto e = ingest::parse_gc_line(line, t, process);
        if (!e) return py::none();
        py::dict d;
        d["t"] = e->t;
        d["process"] = e->process;
        d["cause"] = ingest::cause_key(e->cause);
        d["algorithm"] = e->algorithm;
        d["freed_objects"] = e->freed_objects;
        d["freed_bytes"] = e->freed_bytes;
        d["los_objects"] = e->los_objects;
        d["los_bytes"] = e->los_bytes;
        d["pause_ms"] = e->pause_ms;
        d["total_ms"] = e->total_ms;
        return d;
      },
      py::arg("line"), py::arg("t") = 0.0, py::arg("process") = "");

  // --- aging ---
  m.def(
      "project_degradation",
      [](double slope, double horizon_s, double threshold_ms) {
        const auto p = aging::project_degradation(slope, horizon_s, threshold_ms);
        return py::make_tuple(p.lt_increase_ms, p.ttaf_h());
      },
      py::arg("slope_ms_per_s"), py::arg("horizon_s") = aging::kDefaultHorizonS,
      py::arg("threshold_ms") = aging::kDefaultThresholdMs);
  m.def(
      "rejuvenation_gain",
      [](double lt_base, double ttaf_base, double lt_rej, double ttaf_rej) {
        const auto g = aging::rejuvenation_gain(aging::MeasuredDegradation{lt_base, ttaf_base},
                                                aging::MeasuredDegradation{lt_rej, ttaf_rej});
        return py::make_tuple(g.gain_lt_pct, g.gain_ttaf_pct);
      },
      py::arg("lt_baseline_ms"), py::arg("ttaf_baseline_h"), py::arg("lt_rejuvenated_ms"),
      py::arg("ttaf_rejuvenated_h"));

  // --- synth ---
  m.def(
      "generate_series",
      [](std::size_t n, double dt, double slope, double intercept, double noise_sigma, double ar1_phi,
         std::uint64_t seed) {
        synth::SeriesSpec spec;
        spec.n = n;
        spec.dt = dt;
        spec.slope = slope;
        spec.intercept = intercept;
        spec.noise_sigma = noise_sigma;
        spec.ar1_phi = ar1_phi;
        spec.seed = seed;
        const auto s = synth::generate_series(spec);
        return py::make_tuple(s.times(), s.values());
      },
      py::arg("n"), py::arg("dt") = 30.0, py::arg("slope") = 0.0, py::arg("intercept") = 0.0,
      py::arg("noise_sigma") = 0.0, py::arg("ar1_phi") = 0.0, py::arg("seed") = 0);
}
