#include "agingscope/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "agingscope/csv.hpp"
#include "agingscope/error.hpp"

namespace agingscope::model {

std::string_view to_string(FactorName f) {
  switch (f) {
    case FactorName::DEV: return "DEV";
    case FactorName::VER: return "VER";
    case FactorName::APP: return "APP";
    case FactorName::EVENTS: return "EVENTS";
    case FactorName::STO: return "STO";
  }
  return "?";
}

FactorName parse_factor(std::string_view name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (FactorName f : kAllFactors)
    if (up == to_string(f)) return f;
  throw Error(ErrorCode::InvalidArgument, "unknown factor '" + std::string(name) + "'");
}

const std::string& ExperimentConfig::level(FactorName f) const {
  auto it = levels.find(f);
  if (it == levels.end())
    throw Error(ErrorCode::InvalidArgument, id + " has no level for " + std::string(to_string(f)));
  return it->second;
}

ExperimentPlan::ExperimentPlan(std::vector<ExperimentConfig> experiments)
    : experiments_(std::move(experiments)) {
  std::set<std::string> ids;
  std::set<std::vector<std::string>> combos;
  for (const auto& e : experiments_) {
    if (e.id.empty()) throw Error(ErrorCode::InvalidArgument, "experiment with empty id");
    if (!ids.insert(e.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate id " + e.id);
    if (!(e.duration_s > 0.0) || !std::isfinite(e.duration_s))
      throw Error(ErrorCode::InvalidArgument, e.id + ": duration must be > 0");
    std::vector<std::string> combo;
    for (FactorName f : kAllFactors) {
      const std::string& lv = e.level(f);
      if (lv.empty())
        throw Error(ErrorCode::InvalidArgument, e.id + ": empty level for " + std::string(to_string(f)));
      level_sets_[f].insert(lv);
      combo.push_back(lv);
    }
    if (e.levels.size() != kAllFactors.size())
      throw Error(ErrorCode::InvalidArgument, e.id + ": unexpected factor");
    if (!combos.insert(combo).second)
      throw Error(ErrorCode::InvalidArgument, e.id + " duplicates the configuration of another experiment");
  }
}

const ExperimentConfig* ExperimentPlan::find(std::string_view id) const {
  for (const auto& e : experiments_)
    if (e.id == id) return &e;
  return nullptr;
}

ExperimentPlan ExperimentPlan::restrict(FactorName factor, std::string_view level) const {
  std::vector<ExperimentConfig> kept;
  for (const auto& e : experiments_)
    if (e.level(factor) == level) kept.push_back(e);
  return ExperimentPlan(std::move(kept));
}

ExperimentPlan ExperimentPlan::restrict_ids(const std::set<std::string>& ids) const {
  std::vector<ExperimentConfig> kept;
  for (const auto& e : experiments_)
    if (ids.count(e.id)) kept.push_back(e);
  return ExperimentPlan(std::move(kept));
}

namespace {

constexpr std::array<std::string_view, 7> kPlanHeader = {"id", "dev", "ver", "app", "events", "sto",
                                                        "duration_s"};

}  // namespace

ExperimentPlan parse_plan_csv(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && csv::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw Error(ErrorCode::BadHeader, "plan manifest is empty");
  auto header = csv::split_row(lines[i]);
  bool ok = header.size() == kPlanHeader.size();
  for (std::size_t c = 0; ok && c < header.size(); ++c) ok = csv::trim(header[c]) == kPlanHeader[c];
  if (!ok) throw Error(ErrorCode::BadHeader, "expected 'id,dev,ver,app,events,sto,duration_s'");
  std::vector<ExperimentConfig> exps;
  for (++i; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    auto f = csv::split_row(lines[i]);
    if (f.size() != kPlanHeader.size())
      throw Error(ErrorCode::InvalidArgument, "plan row " + std::to_string(i + 1) + " has " +
                                                  std::to_string(f.size()) + " fields");
    ExperimentConfig e;
    e.id = csv::trim(f[0]);
    for (std::size_t k = 0; k < kAllFactors.size(); ++k) e.levels[kAllFactors[k]] = csv::trim(f[k + 1]);
    e.duration_s = csv::parse_double(f[6], "duration_s");
    exps.push_back(std::move(e));
  }
  return ExperimentPlan(std::move(exps));
}

ExperimentPlan load_plan_file(const std::string& path) { return parse_plan_csv(csv::read_file(path)); }

std::string format_plan_csv(const ExperimentPlan& plan) {
  std::string out = "id,dev,ver,app,events,sto,duration_s\n";
  for (const auto& e : plan.experiments()) {
    std::vector<std::string> row{e.id};
    for (FactorName f : kAllFactors) row.push_back(e.level(f));
    row.push_back(csv::format_double(e.duration_s));
    out += csv::join_row(row) + "\n";
  }
  return out;
}

ExperimentPlan bundled_plan72() {
  // Blocks in plan order: (device, version). Within a block APP varies slowest,
  // then EVENTS, then STO.
  const std::vector<std::pair<std::string, std::string>> blocks = {
      {"HUAWEIP8", "ANDROID5"}, {"HUAWEIP8", "ANDROID6"},      {"HTCONEM9", "ANDROID6"},
      {"LGNEXUS", "ANDROID6"},  {"SAMSUNGS6EDGE", "ANDROID6"}, {"SAMSUNGS6EDGE", "ANDROID7"}};
  std::vector<ExperimentConfig> exps;
  int n = 0;
  for (const auto& [dev, ver] : blocks)
    for (const char* app : {"EU", "CHINA"})
      for (const char* events : {"MIXED1", "MIXED2", "MIXED3"})
        for (const char* sto : {"NORMAL", "FULL"}) {
          ExperimentConfig e;
          e.id = "EXP" + std::to_string(++n);
          e.levels = {{FactorName::DEV, dev},
                      {FactorName::VER, ver},
                      {FactorName::APP, app},
                      {FactorName::EVENTS, events},
                      {FactorName::STO, sto}};
          e.duration_s = 21600.0;
          exps.push_back(std::move(e));
        }
  return ExperimentPlan(std::move(exps));
}

namespace {

std::vector<std::string> key_without(const ExperimentConfig& e, FactorName factor) {
  std::vector<std::string> key;
  for (FactorName f : kAllFactors)
    if (f != factor) key.push_back(e.level(f));
  return key;
}

}  // namespace

std::vector<FactorPartition> partition_by_factor(const ExperimentPlan& plan, FactorName factor) {
  std::set<std::string> levels;
  for (const auto& e : plan.experiments()) levels.insert(e.level(factor));
  if (levels.size() < 2)
    throw Error(ErrorCode::SingleLevel, std::string(to_string(factor)) + " is constant in the plan");

  std::vector<FactorPartition> out;
  const std::vector<std::string> lv(levels.begin(), levels.end());
  for (std::size_t a = 0; a < lv.size(); ++a) {
    for (std::size_t b = a + 1; b < lv.size(); ++b) {
      FactorPartition p;
      p.factor = factor;
      p.level_a = lv[a];
      p.level_b = lv[b];
      std::map<std::vector<std::string>, const ExperimentConfig*> at_b;
      for (const auto& e : plan.experiments())
        if (e.level(factor) == lv[b]) at_b.emplace(key_without(e, factor), &e);
      std::set<std::string> matched_b;
      for (const auto& e : plan.experiments()) {
        if (e.level(factor) != lv[a]) continue;
        auto it = at_b.find(key_without(e, factor));
        if (it == at_b.end())
          throw Error(ErrorCode::UnpairedConfig,
                      e.id + " has no counterpart at " + std::string(to_string(factor)) + "=" + lv[b]);
        p.configs_a.push_back(e);
        p.configs_b.push_back(*it->second);
        p.pairs.emplace_back(e.id, it->second->id);
        matched_b.insert(it->second->id);
      }
      // Plan configurations are unique, so matching is one-to-one; any leftover
      // config at level b lacks a counterpart at level a.
      for (const auto& [key, e] : at_b)
        if (!matched_b.count(e->id))
          throw Error(ErrorCode::UnpairedConfig,
                      e->id + " has no counterpart at " + std::string(to_string(factor)) + "=" + lv[a]);
      out.push_back(std::move(p));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SeriesKind k) {
  return k == SeriesKind::Cumulative ? "cumulative" : "instantaneous";
}

SeriesKind parse_series_kind(std::string_view s) {
  if (s == "cumulative") return SeriesKind::Cumulative;
  if (s == "instantaneous") return SeriesKind::Instantaneous;
  throw Error(ErrorCode::InvalidArgument, "unknown series kind '" + std::string(s) + "'");
}

std::vector<double> MetricSeries::times() const {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.t);
  return t;
}

std::vector<double> MetricSeries::values() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.value);
  return v;
}

void validate_series(const MetricSeries& s) {
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    const auto& x = s.samples[i];
    if (!(x.t >= 0.0) || !std::isfinite(x.t))
      throw Error(ErrorCode::InvalidArgument, s.entity + "/" + s.metric + ": negative or non-finite t");
    if (!std::isfinite(x.value))
      throw Error(ErrorCode::InvalidArgument, s.entity + "/" + s.metric + ": non-finite value");
    if (i > 0 && !(x.t > s.samples[i - 1].t))
      throw Error(ErrorCode::InvalidArgument, s.entity + "/" + s.metric + ": timestamps not increasing");
  }
}

MetricSeries make_series(std::string entity, std::string metric, const std::vector<double>& t,
                         const std::vector<double>& values) {
  if (t.size() != values.size())
    throw Error(ErrorCode::LengthMismatch, "times and values differ in length");
  MetricSeries s;
  s.entity = std::move(entity);
  s.metric = std::move(metric);
  s.samples.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s.samples.push_back({t[i], values[i], false});
  validate_series(s);
  return s;
}

MetricSeries to_rate_series(const MetricSeries& s) {
  if (s.kind != SeriesKind::Cumulative)
    throw Error(ErrorCode::InvalidArgument, s.entity + "/" + s.metric + " is not cumulative");
  if (s.samples.size() < 2)
    throw Error(ErrorCode::TooShort, "rate series needs at least 2 samples");
  MetricSeries out;
  out.entity = s.entity;
  out.metric = s.metric;
  out.unit = s.unit.empty() ? "" : s.unit + "/interval";
  out.kind = SeriesKind::Instantaneous;
  out.samples.reserve(s.samples.size() - 1);
  for (std::size_t i = 1; i < s.samples.size(); ++i) {
    const auto& cur = s.samples[i];
    double delta = cur.value - s.samples[i - 1].value;
    if (delta < 0.0)
      out.samples.push_back({cur.t, cur.value, true});
    else
      out.samples.push_back({cur.t, delta, cur.flagged});
  }
  return out;
}

}  // namespace agingscope::model
