#include <fstream>
#include <sstream>

#include "agingscope/csv.hpp"
#include "agingscope/model.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace agingscope;
using namespace agingscope::model;

namespace {

ExperimentConfig config(std::string id, std::string dev, std::string ver, std::string app, std::string events,
                        std::string sto) {
  ExperimentConfig e;
  e.id = std::move(id);
  e.levels = {{FactorName::DEV, dev},
              {FactorName::VER, ver},
              {FactorName::APP, app},
              {FactorName::EVENTS, events},
              {FactorName::STO, sto}};
  e.duration_s = 21600;
  return e;
}

std::vector<ExperimentConfig> factorial3() {
  std::vector<ExperimentConfig> out;
  int n = 0;
  for (const char* d : {"D1", "D2"})
    for (const char* a : {"A1", "A2"})
      for (const char* s : {"S1", "S2"}) out.push_back(config("E" + std::to_string(++n), d, "V", a, "M", s));
  return out;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("factor names") {
    for (FactorName f : kAllFactors) CHECK(parse_factor(to_string(f)) == f);
    CHECK(parse_factor("events") == FactorName::EVENTS);
    CHECK(parse_factor("Sto") == FactorName::STO);
    CHECK_CODE(parse_factor("WL"), ErrorCode::InvalidArgument);
  }

  TEST_CASE("plan validation") {
    auto a = config("A", "d", "v", "x", "m", "s");
    auto b = config("B", "d", "v", "x", "m", "s");
    CHECK_CODE(ExperimentPlan({a, b}), ErrorCode::InvalidArgument);
    b.id = "A";
    b.levels[FactorName::STO] = "t";
    CHECK_CODE(ExperimentPlan({a, b}), ErrorCode::InvalidArgument);
    a.duration_s = 0;
    CHECK_CODE(ExperimentPlan({a}), ErrorCode::InvalidArgument);
    a.duration_s = 1;
    a.levels.erase(FactorName::VER);
    CHECK_CODE(ExperimentPlan({a}), ErrorCode::InvalidArgument);
  }

  TEST_CASE("bundled plan shape") {
    const auto plan = bundled_plan72();
    REQUIRE(plan.size() == 72);
    CHECK(plan.level_sets().at(FactorName::DEV).size() == 4);
    CHECK(plan.level_sets().at(FactorName::VER).size() == 3);
    CHECK(plan.level_sets().at(FactorName::APP).size() == 2);
    CHECK(plan.level_sets().at(FactorName::EVENTS).size() == 3);
    CHECK(plan.level_sets().at(FactorName::STO).size() == 2);
    CHECK(plan.experiments().front().id == "EXP1");
    CHECK(plan.experiments().back().id == "EXP72");
    for (const auto& e : plan.experiments()) CHECK(e.duration_s == 21600);
  }

  TEST_CASE("bundled data file matches the plan") {
    const std::string text = csv::read_file(testing::data_path("plan72.csv"));
    CHECK(text == format_plan_csv(bundled_plan72()));
    const auto parsed = parse_plan_csv(text);
    CHECK(format_plan_csv(parsed) == text);
  }

  TEST_CASE("plan csv errors") {
    CHECK_CODE(parse_plan_csv(""), ErrorCode::BadHeader);
    CHECK_CODE(parse_plan_csv("id,dev\n"), ErrorCode::BadHeader);
    CHECK_CODE(parse_plan_csv("id,dev,ver,app,events,sto,duration_s\nE1,a,b,c,d,e,abc\n"),
               ErrorCode::NonNumericField);
    CHECK_CODE(parse_plan_csv("id,dev,ver,app,events,sto,duration_s\nE1,a,b\n"), ErrorCode::InvalidArgument);
  }

  TEST_CASE("VER partition of the HUAWEIP8 block") {
    const auto sub = bundled_plan72().restrict(FactorName::DEV, "HUAWEIP8");
    REQUIRE(sub.size() == 24);
    const auto parts = partition_by_factor(sub, FactorName::VER);
    REQUIRE(parts.size() == 1);
    const auto& p = parts[0];
    CHECK(p.level_a == "ANDROID5");
    CHECK(p.level_b == "ANDROID6");
    REQUIRE(p.pairs.size() == 12);
    for (int i = 0; i < 12; ++i) {
      CHECK(p.pairs[i].first == "EXP" + std::to_string(i + 1));
      CHECK(p.pairs[i].second == "EXP" + std::to_string(i + 13));
      for (FactorName f : {FactorName::APP, FactorName::EVENTS, FactorName::STO})
        CHECK(p.configs_a[i].level(f) == p.configs_b[i].level(f));
    }
  }

  TEST_CASE("single level and unpaired plans") {
    CHECK_CODE(partition_by_factor(ExperimentPlan({config("E", "d", "v", "a", "m", "s")}), FactorName::DEV),
               ErrorCode::SingleLevel);
    CHECK_CODE(partition_by_factor(bundled_plan72(), FactorName::DEV), ErrorCode::UnpairedConfig);
    auto exps = factorial3();
    exps.pop_back();
    CHECK_CODE(partition_by_factor(ExperimentPlan(exps), FactorName::STO), ErrorCode::UnpairedConfig);
  }

  TEST_CASE("factorial partitions agree with brute-force matching") {
    const ExperimentPlan plan(factorial3());
    for (FactorName f : {FactorName::DEV, FactorName::APP, FactorName::STO}) {
      const auto parts = partition_by_factor(plan, f);
      REQUIRE(parts.size() == 1);
      const auto& p = parts[0];
      CHECK(p.pairs.size() == 4);
      auto same_except = [f](const ExperimentConfig& x, const ExperimentConfig& y) {
        for (FactorName g : kAllFactors)
          if (g != f && x.level(g) != y.level(g)) return false;
        return x.level(f) != y.level(f);
      };
      const auto brute = oracle::brute_pairs(p.configs_a, p.configs_b, same_except);
      REQUIRE(brute.size() == 4);
      for (std::size_t i = 0; i < brute.size(); ++i) CHECK(brute[i] == std::make_pair(i, i));
    }
  }

  TEST_CASE("three-level factor yields one partition per pair of levels") {
    std::vector<ExperimentConfig> exps;
    int n = 0;
    for (const char* v : {"V1", "V2", "V3"})
      for (const char* s : {"S1", "S2"}) exps.push_back(config("E" + std::to_string(++n), "D", v, "A", "M", s));
    const auto parts = partition_by_factor(ExperimentPlan(exps), FactorName::VER);
    REQUIRE(parts.size() == 3);
    CHECK(parts[0].level_a == "V1");
    CHECK(parts[0].level_b == "V2");
    CHECK(parts[2].level_a == "V2");
    CHECK(parts[2].level_b == "V3");
    for (const auto& p : parts) CHECK(p.pairs.size() == 2);
  }

  TEST_CASE("rate series") {
    auto s = make_series("e", "m", {0, 30, 60, 90}, {0, 5, 7, 12});
    s.kind = SeriesKind::Cumulative;
    auto r = to_rate_series(s);
    REQUIRE(r.size() == 3);
    CHECK(r.kind == SeriesKind::Instantaneous);
    CHECK(r.values() == std::vector<double>{5, 2, 5});
    CHECK(r.times() == std::vector<double>{30, 60, 90});

    auto cumulative = [](std::vector<double> t, std::vector<double> v) {
      auto c = make_series("e", "m", std::move(t), std::move(v));
      c.kind = SeriesKind::Cumulative;
      return c;
    };
    auto flat = to_rate_series(cumulative({0, 1, 2}, {4, 4, 4}));
    CHECK(flat.values() == std::vector<double>{0, 0});

    auto reset = to_rate_series(cumulative({0, 1}, {10, 3}));
    REQUIRE(reset.size() == 1);
    CHECK(reset.samples[0].value == 3);
    CHECK(reset.samples[0].flagged);
    CHECK_CODE(to_rate_series(make_series("e", "m", {0, 1}, {1, 2})), ErrorCode::InvalidArgument);
  }

  TEST_CASE("series invariants") {
    CHECK_NOTHROW(validate_series(make_series("e", "m", {0, 1}, {1, 2})));
    CHECK_CODE(make_series("e", "m", {0, 0}, {1, 2}), ErrorCode::InvalidArgument);
    CHECK_CODE(make_series("e", "m", {-1, 0}, {1, 2}), ErrorCode::InvalidArgument);
    CHECK_CODE(make_series("e", "m", {0, 1}, {1, std::nan("")}), ErrorCode::InvalidArgument);
    CHECK_CODE(make_series("e", "m", {0, 1}, {1}), ErrorCode::LengthMismatch);
    CHECK(parse_series_kind(to_string(SeriesKind::Cumulative)) == SeriesKind::Cumulative);
    CHECK_CODE(parse_series_kind("gauge"), ErrorCode::InvalidArgument);
  }
}
