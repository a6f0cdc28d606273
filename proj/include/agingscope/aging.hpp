#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agingscope::aging {

inline constexpr double kDefaultHorizonS = 21600.0;
inline constexpr double kDefaultThresholdMs = 200.0;
inline constexpr std::size_t kDefaultMinGcSamples = 100;

struct DegradationProjection {
  double slope_ms_per_s = 0.0;
  double horizon_s = kDefaultHorizonS;
  double lt_increase_ms = 0.0;
  double threshold_ms = kDefaultThresholdMs;
  double ttaf_s = 0.0;  // +inf when slope <= 0

  double ttaf_h() const { return ttaf_s / 3600.0; }
};

DegradationProjection project_degradation(double slope_ms_per_s, double horizon_s = kDefaultHorizonS,
                                          double threshold_ms = kDefaultThresholdMs);

/// A measured row: launch-time increase over the horizon and its TTAF in hours.
struct MeasuredDegradation {
  double lt_increase_ms = 0.0;
  double ttaf_h = 0.0;
};

/// TTAF in hours implied by an increase over `horizon_s` and a threshold.
double ttaf_hours_from_increase(double lt_increase_ms, double horizon_s = kDefaultHorizonS,
                                double threshold_ms = kDefaultThresholdMs);

struct RejuvenationGain {
  double gain_lt_pct = 0.0;
  double gain_ttaf_pct = 0.0;

  long rounded_lt() const;
  long rounded_ttaf() const;
};

RejuvenationGain rejuvenation_gain(const DegradationProjection& baseline, const DegradationProjection& rejuvenated);
RejuvenationGain rejuvenation_gain(const MeasuredDegradation& baseline, const MeasuredDegradation& rejuvenated);

// --- trend counting -------------------------------------------------------------

/// One trend verdict reduced to what the rankings need.
struct TrendObservation {
  std::string experiment;
  std::string entity;  // process, or `process|tid|task` for tasks
  std::string metric;  // series metric name
  std::size_t n = 0;
  bool increasing = false;  // declared and slope > 0
};

struct RankEntry {
  std::string unit;
  double count = 0.0;
  std::size_t rank = 0;  // 1-based
};

struct TrendCountRanking {
  std::string scope;   // process for task-group rankings, empty otherwise
  std::string metric;  // ranking metric, e.g. gc_duration_explicit or utime
  std::map<std::string, double> counts;
  std::vector<RankEntry> top;
};

inline constexpr std::string_view kGcRankingMetrics[] = {"gc_duration_explicit", "gc_duration_background",
                                                         "gc_pause_explicit", "gc_pause_background"};
inline constexpr std::string_view kTaskRankingMetrics[] = {"majflt", "minflt", "utime", "stime"};

/// Maps a GC series metric (gc_total_ms.concurrent, ...) to its ranking metric.
/// Concurrent collections count as background ones; other causes are not ranked.
std::optional<std::string> gc_ranking_metric(std::string_view series_metric);
/// Maps a task series metric (utime_ticks, ...) to its ranking metric.
std::optional<std::string> task_ranking_metric(std::string_view series_metric);

/// Count descending, then unit name.
std::vector<RankEntry> rank_counts(const std::map<std::string, double>& counts, std::size_t top_n);

/// Per-process count of experiments with an increasing GC trend, for each of the
/// four GC ranking metrics. Series with fewer than `min_samples` are ignored.
std::vector<TrendCountRanking> count_gc_trends(std::span<const TrendObservation> observations,
                                               std::size_t min_samples = kDefaultMinGcSamples,
                                               std::size_t top_n = 5);

/// Task-name patterns per group. A pattern ending in '*' matches by prefix,
/// otherwise by exact name. Exact matches win, then the longest prefix.
class TaskGroupRules {
 public:
  TaskGroupRules() = default;
  explicit TaskGroupRules(std::vector<std::pair<std::string, std::vector<std::string>>> groups);

  const std::vector<std::pair<std::string, std::vector<std::string>>>& groups() const { return groups_; }
  std::string classify(std::string_view task_name) const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> groups_;
};

inline constexpr std::string_view kOtherGroup = "OTHER";

/// CSV with header `group,pattern`, one pattern per row.
TaskGroupRules parse_task_group_rules(std::string_view text);
std::string format_task_group_rules(const TaskGroupRules& rules);
TaskGroupRules default_task_group_rules();

/// Per (process, metric): each task's count of experiments with an increasing
/// trend, averaged over the tasks of a group. Tasks are identified by process
/// and name, so thread ids may differ between experiments.
std::vector<TrendCountRanking> rank_task_groups(std::span<const TrendObservation> observations,
                                                const TaskGroupRules& rules, std::size_t top_n = 10);

}  // namespace agingscope::aging
