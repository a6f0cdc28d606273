#include <cmath>
#include <fstream>

#include "agingscope/store.hpp"
#include "agingscope/synth.hpp"
#include "support.hpp"

using namespace agingscope;
using namespace agingscope::store;

namespace {

VerdictSet sample_set() {
  VerdictSet set;
  set.alpha = 0.05;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    synth::SeriesSpec spec;
    spec.n = 60;
    spec.slope = seed == 2 ? 0.0 : 0.05;
    spec.noise_sigma = 1;
    spec.ar1_phi = seed == 3 ? 0.7 : 0;
    spec.seed = seed;
    VerdictRecord r;
    r.experiment = "EXP" + std::to_string(seed);
    r.entity = seed == 3 ? "system|1110|Binder:1, \"x\"" : "system";
    r.metric = seed == 3 ? "utime_ticks" : "pss_kb";
    r.transform = seed == 3 ? "rate" : "raw";
    r.verdict = trend::detect_trend(synth::generate_series(spec, r.entity, r.metric));
    set.verdicts.push_back(std::move(r));
  }
  set.skipped.push_back({"EXP1", "tiny", "pss_kb", 5, "fewer than 10 samples"});
  return set;
}

void check_same(const VerdictSet& a, const VerdictSet& b) {
  CHECK(a.alpha == b.alpha);
  REQUIRE(a.verdicts.size() == b.verdicts.size());
  for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
    const auto& x = a.verdicts[i];
    const auto& y = b.verdicts[i];
    CHECK(x.experiment == y.experiment);
    CHECK(x.entity == y.entity);
    CHECK(x.metric == y.metric);
    CHECK(x.transform == y.transform);
    CHECK(x.verdict.series_id == y.verdict.series_id);
    CHECK(x.verdict.n == y.verdict.n);
    CHECK(x.verdict.route == y.verdict.route);
    CHECK(x.verdict.declared == y.verdict.declared);
    CHECK(x.verdict.slope == y.verdict.slope);
    CHECK(x.verdict.ci_low == y.verdict.ci_low);
    CHECK(x.verdict.ci_high == y.verdict.ci_high);
    CHECK(x.verdict.intercept == y.verdict.intercept);
    CHECK(x.verdict.dw_statistic == y.verdict.dw_statistic);
    REQUIRE(x.verdict.tests.size() == y.verdict.tests.size());
    for (std::size_t k = 0; k < x.verdict.tests.size(); ++k) {
      CHECK(x.verdict.tests[k].name == y.verdict.tests[k].name);
      CHECK(x.verdict.tests[k].statistic == y.verdict.tests[k].statistic);
      CHECK(x.verdict.tests[k].p_value == y.verdict.tests[k].p_value);
      CHECK(x.verdict.tests[k].decision == y.verdict.tests[k].decision);
    }
  }
}

}  // namespace

TEST_SUITE("store") {
  TEST_CASE("series store round trip") {
    std::vector<model::MetricSeries> in;
    in.push_back(model::make_series("all-activities", "launch_time_ms", {0, 30.5, 61}, {100, 101.25, 1e-7}));
    auto cum = model::make_series("system|1|Binder:1, x", "minflt", {0, 30}, {5, 9});
    cum.kind = model::SeriesKind::Cumulative;
    in.push_back(cum);
    const auto text = format_series_store(in);
    CHECK(text.rfind("entity,metric,kind,t_s,value\n", 0) == 0);
    auto out = parse_series_store(text);
    REQUIRE(out.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(out[i].entity == in[i].entity);
      CHECK(out[i].metric == in[i].metric);
      CHECK(out[i].kind == in[i].kind);
      CHECK(out[i].times() == in[i].times());
      CHECK(out[i].values() == in[i].values());
    }
    CHECK(format_series_store(out) == text);
  }

  TEST_CASE("series store errors") {
    CHECK_CODE(parse_series_store("a,b\n"), ErrorCode::BadHeader);
    CHECK_CODE(parse_series_store("entity,metric,kind,t_s,value\ne,m,instantaneous,0\n"), ErrorCode::NonNumericField);
    CHECK_CODE(parse_series_store("entity,metric,kind,t_s,value\ne,m,instantaneous,0,x\n"), ErrorCode::NonNumericField);
    CHECK_CODE(parse_series_store("entity,metric,kind,t_s,value\ne,m,instantaneous,5,1\ne,m,instantaneous,1,1\n"),
               ErrorCode::InvalidArgument);
    CHECK(parse_series_store("entity,metric,kind,t_s,value\n").empty());
  }

  TEST_CASE("verdict JSON round trip") {
    const auto set = sample_set();
    const auto text = format_verdicts_json(set);
    auto back = parse_verdicts_json(text);
    check_same(set, back);
    REQUIRE(back.skipped.size() == 1);
    CHECK(back.skipped[0].n == 5);
    CHECK(format_verdicts_json(back) == text);
    CHECK(text.find("\"alpha\"") < text.find("\"verdicts\""));
  }

  TEST_CASE("verdict CSV round trip") {
    const auto set = sample_set();
    const auto text = format_verdicts_csv(set);
    auto back = parse_verdicts_csv(text);
    check_same(set, back);
    CHECK(back.skipped.empty());
    CHECK(format_verdicts_csv(back) == text);
  }

  TEST_CASE("verdict files are sniffed") {
    testing::TempDir dir("store");
    const auto set = sample_set();
    {
      std::ofstream(dir / "v.json") << "\n  " << format_verdicts_json(set);
      std::ofstream(dir / "v.csv") << format_verdicts_csv(set);
    }
    check_same(load_verdicts(dir / "v.json"), set);
    check_same(load_verdicts(dir / "v.csv"), set);
    CHECK_CODE(load_verdicts(dir / "missing.json"), ErrorCode::IoFailure);
    CHECK_CODE(parse_verdicts_json("{\"alpha\": 0.05}"), ErrorCode::BadHeader);
  }
}
