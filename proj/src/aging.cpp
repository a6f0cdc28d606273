#include "agingscope/aging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "agingscope/csv.hpp"
#include "agingscope/error.hpp"
#include "agingscope/ingest.hpp"

namespace agingscope::aging {

DegradationProjection project_degradation(double slope_ms_per_s, double horizon_s, double threshold_ms) {
  if (!(horizon_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (!(threshold_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be positive");
  if (!std::isfinite(slope_ms_per_s)) throw Error(ErrorCode::InvalidArgument, "slope must be finite");
  DegradationProjection p;
  p.slope_ms_per_s = slope_ms_per_s;
  p.horizon_s = horizon_s;
  p.threshold_ms = threshold_ms;
  if (slope_ms_per_s > 0.0) {
    p.lt_increase_ms = slope_ms_per_s * horizon_s;
    p.ttaf_s = threshold_ms / slope_ms_per_s;
  } else {
    p.lt_increase_ms = 0.0;
    p.ttaf_s = std::numeric_limits<double>::infinity();
  }
  return p;
}

double ttaf_hours_from_increase(double lt_increase_ms, double horizon_s, double threshold_ms) {
  return project_degradation(lt_increase_ms / horizon_s, horizon_s, threshold_ms).ttaf_h();
}

long RejuvenationGain::rounded_lt() const { return std::lround(gain_lt_pct); }
long RejuvenationGain::rounded_ttaf() const { return std::lround(gain_ttaf_pct); }

RejuvenationGain rejuvenation_gain(const MeasuredDegradation& b, const MeasuredDegradation& r) {
  if (!(b.lt_increase_ms > 0.0)) throw Error(ErrorCode::ZeroBaseline, "baseline launch-time increase must be positive");
  if (!(b.ttaf_h > 0.0) || !std::isfinite(b.ttaf_h))
    throw Error(ErrorCode::ZeroBaseline, "baseline TTAF must be positive and finite");
  RejuvenationGain g;
  g.gain_lt_pct = (b.lt_increase_ms - r.lt_increase_ms) / b.lt_increase_ms * 100.0;
  g.gain_ttaf_pct = (r.ttaf_h - b.ttaf_h) / b.ttaf_h * 100.0;
  return g;
}

RejuvenationGain rejuvenation_gain(const DegradationProjection& b, const DegradationProjection& r) {
  return rejuvenation_gain(MeasuredDegradation{b.lt_increase_ms, b.ttaf_h()},
                           MeasuredDegradation{r.lt_increase_ms, r.ttaf_h()});
}

// --- trend counting -------------------------------------------------------------

std::optional<std::string> gc_ranking_metric(std::string_view series_metric) {
  std::size_t dot = series_metric.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  std::string_view base = series_metric.substr(0, dot);
  std::string_view cause = series_metric.substr(dot + 1);
  std::string prefix;
  if (base == ingest::kGcTotalMetric) prefix = "gc_duration_";
  else if (base == ingest::kGcPauseMetric) prefix = "gc_pause_";
  else return std::nullopt;
  if (cause == "explicit") return prefix + "explicit";
  if (cause == "background" || cause == "concurrent") return prefix + "background";
  return std::nullopt;
}

std::optional<std::string> task_ranking_metric(std::string_view series_metric) {
  if (series_metric == "minflt" || series_metric == "majflt") return std::string(series_metric);
  if (series_metric == "utime_ticks") return "utime";
  if (series_metric == "stime_ticks") return "stime";
  return std::nullopt;
}

std::vector<RankEntry> rank_counts(const std::map<std::string, double>& counts, std::size_t top_n) {
  std::vector<RankEntry> v;
  v.reserve(counts.size());
  for (const auto& [unit, c] : counts) v.push_back({unit, c, 0});
  std::stable_sort(v.begin(), v.end(), [](const RankEntry& a, const RankEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.unit < b.unit;
  });
  if (v.size() > top_n) v.resize(top_n);
  for (std::size_t i = 0; i < v.size(); ++i) v[i].rank = i + 1;
  return v;
}

std::vector<TrendCountRanking> count_gc_trends(std::span<const TrendObservation> observations,
                                               std::size_t min_samples, std::size_t top_n) {
  std::map<std::string, std::map<std::string, std::set<std::string>>> hits;  // metric -> process -> experiments
  std::map<std::string, std::set<std::string>> seen;                        // metric -> processes
  for (const auto& o : observations) {
    auto metric = gc_ranking_metric(o.metric);
    if (!metric || o.n < min_samples) continue;
    seen[*metric].insert(o.entity);
    if (o.increasing) hits[*metric][o.entity].insert(o.experiment);
  }
  std::vector<TrendCountRanking> out;
  for (std::string_view m : kGcRankingMetrics) {
    TrendCountRanking r;
    r.metric = std::string(m);
    for (const auto& p : seen[r.metric]) r.counts[p] = static_cast<double>(hits[r.metric][p].size());
    r.top = rank_counts(r.counts, top_n);
    out.push_back(std::move(r));
  }
  return out;
}

TaskGroupRules::TaskGroupRules(std::vector<std::pair<std::string, std::vector<std::string>>> groups)
    : groups_(std::move(groups)) {
  std::set<std::string> patterns, names;
  for (const auto& [name, pats] : groups_) {
    if (name.empty() || name == kOtherGroup)
      throw Error(ErrorCode::InvalidArgument, "invalid task group name '" + name + "'");
    if (!names.insert(name).second) throw Error(ErrorCode::InvalidArgument, "duplicate task group '" + name + "'");
    for (const auto& p : pats) {
      if (p.empty() || p == "*") throw Error(ErrorCode::InvalidArgument, "empty pattern in group '" + name + "'");
      if (!patterns.insert(p).second)
        throw Error(ErrorCode::InvalidArgument, "pattern '" + p + "' belongs to more than one group");
    }
  }
}

std::string TaskGroupRules::classify(std::string_view task_name) const {
  for (const auto& [name, pats] : groups_)
    for (const auto& p : pats)
      if (p.back() != '*' && p == task_name) return name;
  std::size_t best_len = 0;
  const std::string* best = nullptr;
  for (const auto& [name, pats] : groups_) {
    for (const auto& p : pats) {
      if (p.back() != '*') continue;
      std::string_view prefix(p.data(), p.size() - 1);
      if (task_name.substr(0, prefix.size()) == prefix && prefix.size() > best_len) {
        best_len = prefix.size();
        best = &name;
      }
    }
  }
  return best ? *best : std::string(kOtherGroup);
}

TaskGroupRules parse_task_group_rules(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && csv::trim(lines[i]).empty()) ++i;
  if (i == lines.size() || csv::trim(lines[i]) != "group,pattern")
    throw Error(ErrorCode::BadHeader, "task group rules: expected header 'group,pattern'");
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  for (++i; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty() || csv::trim(lines[i]).front() == '#') continue;
    auto f = csv::split_row(lines[i]);
    if (f.size() != 2)
      throw Error(ErrorCode::InvalidArgument, "task group rules line " + std::to_string(i + 1) + ": expected 2 fields");
    std::string g = csv::trim(f[0]), p = csv::trim(f[1]);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& e) { return e.first == g; });
    if (it == groups.end()) {
      groups.push_back({g, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back(p);
  }
  return TaskGroupRules(std::move(groups));
}

std::string format_task_group_rules(const TaskGroupRules& rules) {
  std::string out = "group,pattern\n";
  for (const auto& [name, pats] : rules.groups())
    for (const auto& p : pats) out += csv::join_row({name, p}) + "\n";
  return out;
}

TaskGroupRules default_task_group_rules() {
  return TaskGroupRules({
      {"ALARM", {"AlarmManager*"}},
      {"BACKUP", {"backup*", "BackupManager*"}},
      {"ACTIVITY", {"ActivityManager*", "ActivityManger_3", "HwActivityManag"}},
      {"PACKAGE", {"PackageManager*", "PackageInstalle*"}},
      {"INPUT", {"InputReader*", "InputDispatcher*"}},
      {"NETWORK", {"WifiService*", "WifiStateMachin*", "WifiScanningSer*", "NetworkStats*", "ConnectivitySer*",
                   "NetworkPolicy*"}},
  });
}

std::vector<TrendCountRanking> rank_task_groups(std::span<const TrendObservation> observations,
                                                const TaskGroupRules& rules, std::size_t top_n) {
  // (process, metric) -> task name -> experiments with an increasing trend
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::set<std::string>>> per_task;
  std::set<std::string> processes;
  for (const auto& o : observations) {
    auto metric = task_ranking_metric(o.metric);
    auto task = ingest::parse_task_entity(o.entity);
    if (!metric || !task) continue;
    processes.insert(task->process);
    auto& experiments = per_task[{task->process, *metric}][task->task_name];
    if (o.increasing) experiments.insert(o.experiment);
  }
  std::vector<TrendCountRanking> out;
  for (const auto& process : processes) {
    for (std::string_view m : kTaskRankingMetrics) {
      TrendCountRanking r;
      r.scope = process;
      r.metric = std::string(m);
      auto it = per_task.find({process, r.metric});
      if (it == per_task.end()) continue;
      std::map<std::string, std::pair<double, std::size_t>> sums;
      for (const auto& [task_name, experiments] : it->second) {
        auto& s = sums[rules.classify(task_name)];
        s.first += static_cast<double>(experiments.size());
        s.second += 1;
      }
      for (const auto& [group, s] : sums) r.counts[group] = s.first / static_cast<double>(s.second);
      r.top = rank_counts(r.counts, top_n);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace agingscope::aging
