#include "agingscope/store.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "agingscope/csv.hpp"
#include "agingscope/error.hpp"

namespace agingscope::store {

using nlohmann::json;

std::string format_series_store(std::span<const model::MetricSeries> series) {
  std::string out = "entity,metric,kind,t_s,value\n";
  for (const auto& s : series) {
    const std::string prefix =
        csv::escape(s.entity) + "," + csv::escape(s.metric) + "," + std::string(model::to_string(s.kind)) + ",";
    for (const auto& p : s.samples) out += prefix + csv::format_double(p.t) + "," + csv::format_double(p.value) + "\n";
  }
  return out;
}

std::vector<model::MetricSeries> parse_series_store(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && csv::trim(lines[i]).empty()) ++i;
  if (i == lines.size() || csv::trim(lines[i]) != "entity,metric,kind,t_s,value")
    throw Error(ErrorCode::BadHeader, "series store: expected header 'entity,metric,kind,t_s,value'");
  std::vector<model::MetricSeries> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (++i; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    auto f = csv::split_row(lines[i]);
    if (f.size() != 5)
      throw Error(ErrorCode::NonNumericField, "series store line " + std::to_string(i + 1) + ": expected 5 fields");
    auto key = std::make_pair(f[0], f[1]);
    auto [it, fresh] = index.try_emplace(key, out.size());
    if (fresh) {
      model::MetricSeries s;
      s.entity = f[0];
      s.metric = f[1];
      s.kind = model::parse_series_kind(csv::trim(f[2]));
      out.push_back(std::move(s));
    }
    out[it->second].samples.push_back({csv::parse_double(f[3], "t_s"), csv::parse_double(f[4], "value"), false});
  }
  for (const auto& s : out) model::validate_series(s);
  return out;
}

void write_series_store(const std::string& path, std::span<const model::MetricSeries> series) {
  csv::write_file(path, format_series_store(series));
}

std::vector<model::MetricSeries> load_series_store(const std::string& path) {
  return parse_series_store(csv::read_file(path));
}

// --- verdicts -----------------------------------------------------------------

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

json test_to_json(const trend::TestResult& t) {
  json j;
  j["name"] = std::string(trend::to_string(t.name));
  j["stat"] = number_or_null(t.statistic);
  j["p"] = t.p_value ? number_or_null(*t.p_value) : json(nullptr);
  j["decision"] = std::string(trend::to_string(t.decision));
  return j;
}

trend::TestResult test_from_json(const json& j) {
  trend::TestResult t;
  t.name = trend::parse_test_name(j.at("name").get<std::string>());
  t.statistic = number_from(j.at("stat"));
  if (!j.at("p").is_null()) t.p_value = j.at("p").get<double>();
  t.decision = trend::parse_decision(j.at("decision").get<std::string>());
  return t;
}

}  // namespace

std::string format_verdicts_json(const VerdictSet& set) {
  json root;
  root["alpha"] = set.alpha;
  json verdicts = json::array();
  for (const auto& r : set.verdicts) {
    const auto& v = r.verdict;
    json j;
    j["experiment"] = r.experiment;
    j["entity"] = r.entity;
    j["metric"] = r.metric;
    j["transform"] = r.transform;
    j["series_id"] = v.series_id;
    j["n"] = v.n;
    j["route"] = std::string(trend::to_string(v.route));
    j["dw"] = {{"stat", number_or_null(v.dw_statistic)}, {"decision", std::string(trend::to_string(v.dw_decision))}};
    json tests = json::array();
    for (const auto& t : v.tests) tests.push_back(test_to_json(t));
    j["tests"] = tests;
    j["declared"] = v.declared;
    j["slope"] = number_or_null(v.slope);
    j["ci95"] = json::array({number_or_null(v.ci_low), number_or_null(v.ci_high)});
    j["intercept"] = number_or_null(v.intercept);
    verdicts.push_back(std::move(j));
  }
  root["verdicts"] = verdicts;
  json skipped = json::array();
  for (const auto& s : set.skipped)
    skipped.push_back(
        {{"experiment", s.experiment}, {"entity", s.entity}, {"metric", s.metric}, {"n", s.n}, {"reason", s.reason}});
  root["skipped"] = skipped;
  return root.dump(2) + "\n";
}

VerdictSet parse_verdicts_json(std::string_view text) {
  VerdictSet set;
  try {
    const json root = json::parse(text);
    set.alpha = root.value("alpha", 0.05);
    for (const auto& j : root.at("verdicts")) {
      VerdictRecord r;
      r.experiment = j.at("experiment").get<std::string>();
      r.entity = j.at("entity").get<std::string>();
      r.metric = j.at("metric").get<std::string>();
      r.transform = j.value("transform", "raw");
      auto& v = r.verdict;
      v.series_id = j.value("series_id", r.entity + "/" + r.metric);
      v.n = j.at("n").get<std::size_t>();
      v.route = trend::parse_route(j.at("route").get<std::string>());
      v.dw_statistic = number_from(j.at("dw").at("stat"));
      v.dw_decision = trend::parse_decision(j.at("dw").at("decision").get<std::string>());
      for (const auto& t : j.at("tests")) v.tests.push_back(test_from_json(t));
      v.declared = j.at("declared").get<bool>();
      v.slope = number_from(j.at("slope"));
      v.ci_low = number_from(j.at("ci95").at(0));
      v.ci_high = number_from(j.at("ci95").at(1));
      v.intercept = number_from(j.value("intercept", json(nullptr)));
      set.verdicts.push_back(std::move(r));
    }
    if (root.contains("skipped")) {
      for (const auto& j : root.at("skipped"))
        set.skipped.push_back({j.at("experiment").get<std::string>(), j.at("entity").get<std::string>(),
                               j.at("metric").get<std::string>(), j.at("n").get<std::size_t>(),
                               j.value("reason", "")});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadHeader, std::string("verdict file: ") + e.what());
  }
  return set;
}

namespace {

const std::vector<std::string> kVerdictColumns = {
    "experiment", "entity",   "metric", "transform", "series_id",  "n",       "route",     "dw_stat",
    "dw_decision", "mk_test", "mk_stat", "mk_p",     "mk_decision", "cox_stat", "cox_p",    "cox_decision",
    "t_stat",     "t_p",      "t_decision", "rho_stat", "rho_p",    "rho_decision", "declared", "slope",
    "ci_low",     "ci_high",  "intercept", "alpha"};

std::string fmt(double v) { return std::isfinite(v) ? csv::format_double(v) : std::string(); }

double parse_opt(const std::string& s, std::string_view what) {
  return csv::trim(s).empty() ? std::nan("") : csv::parse_double(s, what);
}

}  // namespace

std::string format_verdicts_csv(const VerdictSet& set) {
  std::string out = csv::join_row(kVerdictColumns) + "\n";
  for (const auto& r : set.verdicts) {
    const auto& v = r.verdict;
    std::vector<std::string> row = {r.experiment,
                                    r.entity,
                                    r.metric,
                                    r.transform,
                                    v.series_id,
                                    std::to_string(v.n),
                                    std::string(trend::to_string(v.route)),
                                    fmt(v.dw_statistic),
                                    std::string(trend::to_string(v.dw_decision))};
    auto add_test = [&](const trend::TestResult* t) {
      if (!t) {
        row.insert(row.end(), {"", "", ""});
        return;
      }
      row.push_back(fmt(t->statistic));
      row.push_back(t->p_value ? fmt(*t->p_value) : std::string());
      row.push_back(std::string(trend::to_string(t->decision)));
    };
    const trend::TestResult* mk = v.find(trend::TestName::MK) ? v.find(trend::TestName::MK)
                                                               : v.find(trend::TestName::MK_HamedRao);
    row.push_back(mk ? std::string(trend::to_string(mk->name)) : std::string());
    add_test(mk);
    add_test(v.find(trend::TestName::CoxStuart));
    add_test(v.find(trend::TestName::TTest));
    add_test(v.find(trend::TestName::SpearmanRho));
    row.push_back(v.declared ? "true" : "false");
    row.push_back(fmt(v.slope));
    row.push_back(fmt(v.ci_low));
    row.push_back(fmt(v.ci_high));
    row.push_back(fmt(v.intercept));
    row.push_back(csv::format_double(set.alpha));
    out += csv::join_row(row) + "\n";
  }
  return out;
}

VerdictSet parse_verdicts_csv(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && csv::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw Error(ErrorCode::BadHeader, "verdict csv: missing header");
  auto header = csv::split_row(lines[i]);
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) col[csv::trim(header[c])] = c;
  for (const char* required : {"experiment", "entity", "metric", "n", "declared", "slope"})
    if (!col.count(required))
      throw Error(ErrorCode::BadHeader, std::string("verdict csv: missing column '") + required + "'");
  VerdictSet set;
  for (++i; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    auto f = csv::split_row(lines[i]);
    f.resize(std::max(f.size(), header.size()));
    auto get = [&](const std::string& name) -> std::string {
      auto it = col.find(name);
      return it == col.end() ? std::string() : f[it->second];
    };
    VerdictRecord r;
    r.experiment = get("experiment");
    r.entity = get("entity");
    r.metric = get("metric");
    r.transform = get("transform").empty() ? "raw" : get("transform");
    auto& v = r.verdict;
    v.series_id = get("series_id").empty() ? r.entity + "/" + r.metric : get("series_id");
    v.n = static_cast<std::size_t>(csv::parse_int(get("n"), "n"));
    if (!get("route").empty()) v.route = trend::parse_route(get("route"));
    v.dw_statistic = parse_opt(get("dw_stat"), "dw_stat");
    if (!get("dw_decision").empty()) v.dw_decision = trend::parse_decision(get("dw_decision"));
    auto read_test = [&](trend::TestName name, const std::string& prefix) {
      if (get(prefix + "_decision").empty()) return;
      trend::TestResult t;
      t.name = name;
      t.statistic = parse_opt(get(prefix + "_stat"), "stat");
      if (!get(prefix + "_p").empty()) t.p_value = csv::parse_double(get(prefix + "_p"), "p");
      t.decision = trend::parse_decision(get(prefix + "_decision"));
      v.tests.push_back(t);
    };
    read_test(trend::TestName::DurbinWatson, "dw");
    if (!get("mk_test").empty()) read_test(trend::parse_test_name(get("mk_test")), "mk");
    read_test(trend::TestName::CoxStuart, "cox");
    read_test(trend::TestName::TTest, "t");
    read_test(trend::TestName::SpearmanRho, "rho");
    const std::string declared = csv::trim(get("declared"));
    if (declared != "true" && declared != "false")
      throw Error(ErrorCode::NonNumericField, "verdict csv line " + std::to_string(i + 1) + ": bad 'declared'");
    v.declared = declared == "true";
    v.slope = parse_opt(get("slope"), "slope");
    v.ci_low = parse_opt(get("ci_low"), "ci_low");
    v.ci_high = parse_opt(get("ci_high"), "ci_high");
    v.intercept = parse_opt(get("intercept"), "intercept");
    if (!get("alpha").empty()) set.alpha = csv::parse_double(get("alpha"), "alpha");
    set.verdicts.push_back(std::move(r));
  }
  return set;
}

VerdictSet load_verdicts(const std::string& path) {
  const std::string text = csv::read_file(path);
  const std::string head = csv::trim(text.substr(0, 64));
  if (!head.empty() && head.front() == '{') return parse_verdicts_json(text);
  return parse_verdicts_csv(text);
}

}  // namespace agingscope::store
