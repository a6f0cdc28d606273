#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agingscope/model.hpp"

namespace agingscope::ingest {

struct LaunchEvent {
  double t = 0.0;
  std::string activity;  // package/activity, e.g. com.example.myapp/.MainActivity
  double launch_time_ms = 0.0;

  bool operator==(const LaunchEvent&) const = default;
};

enum class GcCauseKind { Explicit, Background, Concurrent, Other };

struct GcCause {
  GcCauseKind kind = GcCauseKind::Other;
  std::string name;  // word as printed, e.g. "Explicit" or "Alloc"

  bool operator==(const GcCause&) const = default;
};

GcCause parse_gc_cause(std::string_view word);
/// Lower-case cause name used in metric names ("explicit", "background", ...).
std::string cause_key(const GcCause& c);

struct GcEvent {
  double t = 0.0;
  std::string process;
  GcCause cause;
  std::string algorithm;  // e.g. "concurrent mark sweep"
  std::uint64_t freed_objects = 0;
  std::uint64_t freed_bytes = 0;
  std::uint64_t los_objects = 0;
  std::uint64_t los_bytes = 0;
  std::vector<double> pause_ms;
  double total_ms = 0.0;

  /// Sum of all listed pauses.
  double pause_total_ms() const;
  bool operator==(const GcEvent&) const = default;
};

struct PssSample {
  double t = 0.0;
  std::string process;
  std::int64_t pid = 0;
  double pss_kb = 0.0;

  bool operator==(const PssSample&) const = default;
};

struct TaskSample {
  double t = 0.0;
  std::string process;  // resolved from pid when known, else empty
  std::int64_t pid = 0;
  std::int64_t tid = 0;
  std::string task_name;
  std::uint64_t minflt = 0;
  std::uint64_t majflt = 0;
  std::uint64_t utime_ticks = 0;
  std::uint64_t stime_ticks = 0;

  bool operator==(const TaskSample&) const = default;
};

// --- logcat -----------------------------------------------------------------

/// One logcat record split into its envelope. Supports the threadtime format
/// (`MM-DD HH:MM:SS.mmm PID TID P TAG: msg`), the brief format (`P/TAG(PID): msg`)
/// and the tag-only form (`P/TAG: msg`). Lines that match none are kept whole
/// as the message.
struct LogcatRecord {
  std::optional<double> timestamp_s;  // seconds since Jan 1 00:00 (non-leap calendar)
  std::optional<std::int64_t> pid;
  char priority = '?';
  std::string tag;
  std::string message;
};

LogcatRecord split_logcat_line(std::string_view line);
/// Formats seconds-since-Jan-1 as `MM-DD HH:MM:SS.mmm` (milliseconds rounded).
std::string format_logcat_timestamp(double seconds);

/// Parses `+Nms`, `+NsMms`, `+NmMsKms` style durations (hours also accepted).
std::optional<double> parse_android_duration_ms(std::string_view text);
/// Inverse of parse_android_duration_ms for integral milliseconds.
std::string format_android_duration(std::int64_t ms);

/// Recognises an Activity Manager "Displayed <component>: +<duration>" line.
/// `t` is used unless the line carries a threadtime timestamp.
std::optional<LaunchEvent> parse_displayed_line(std::string_view line, double t);

/// Recognises an ART "... GC freed ..." report. `t` and `process` are used
/// unless the line carries its own timestamp.
std::optional<GcEvent> parse_gc_line(std::string_view line, double t, std::string_view process);
/// Renders a GC event in the ART log message format (without the logcat envelope).
std::string format_gc_message(const GcEvent& e);
std::string format_size(std::uint64_t bytes);

// --- PSS / tasks --------------------------------------------------------------

/// Header `t_s,process,pid,pss_kb`. Rows are stably ordered by t within each process.
std::vector<PssSample> parse_pss_csv(std::string_view text);
std::string format_pss_csv(std::span<const PssSample> rows);

/// Best-effort extractor for the "Total PSS by process" block of `dumpsys meminfo`.
std::vector<PssSample> parse_dumpsys_meminfo(std::string_view text, double t);

/// Kernel `/proc/<pid>/task/<tid>/stat` line. The comm field is delimited by the
/// first '(' and the last ')'. The leading id is the tid; pid defaults to it.
TaskSample parse_task_stat_line(std::string_view line, double t);
std::string format_task_stat_line(const TaskSample& s);

/// Header `t_s,pid,tid,stat_line`; the stat line is the remainder of the row.
std::vector<TaskSample> parse_tasks_csv(std::string_view text);
std::string format_tasks_csv(std::span<const TaskSample> rows);

// --- series assembly ---------------------------------------------------------

inline constexpr std::string_view kPooledActivities = "all-activities";
inline constexpr std::string_view kLaunchMetric = "launch_time_ms";
inline constexpr std::string_view kPssMetric = "pss_kb";
inline constexpr std::string_view kGcTotalMetric = "gc_total_ms";
inline constexpr std::string_view kGcPauseMetric = "gc_pause_ms";

/// Entity naming for task series: `process|tid|task_name`.
std::string task_entity(std::string_view process, std::int64_t tid, std::string_view task_name);
struct TaskEntity {
  std::string process;
  std::int64_t tid = 0;
  std::string task_name;
};
std::optional<TaskEntity> parse_task_entity(std::string_view entity);

/// GC series metric names carry the cause: `gc_total_ms.explicit`.
std::string gc_metric_name(std::string_view base, const GcCause& cause);

/// Pooled all-activities series plus one series per activity.
std::vector<model::MetricSeries> build_series(std::span<const LaunchEvent> events);
/// gc_total_ms.<cause> and gc_pause_ms.<cause> per process.
std::vector<model::MetricSeries> build_series(std::span<const GcEvent> events);
/// pss_kb per process.
std::vector<model::MetricSeries> build_series(std::span<const PssSample> samples);
/// Cumulative minflt, majflt, utime_ticks, stime_ticks per task.
std::vector<model::MetricSeries> build_series(std::span<const TaskSample> samples);

// --- experiment directories --------------------------------------------------

struct ParseIssue {
  std::string file;
  std::size_t line = 0;
  std::string message;
};

struct ExperimentCapture {
  std::string experiment_id;
  std::vector<LaunchEvent> launches;
  std::vector<GcEvent> gcs;
  std::vector<PssSample> pss;
  std::vector<TaskSample> tasks;
  std::vector<ParseIssue> errors;
  std::size_t skipped_bytes = 0;  // non-ASCII bytes dropped from logcat text

  std::size_t record_count() const { return launches.size() + gcs.size() + pss.size() + tasks.size(); }
};

struct LogcatOptions {
  /// Time assigned to lines without a threadtime stamp: line_index * interval.
  double line_interval_s = 1.0;
  /// Default process for GC lines without a resolvable pid.
  std::string default_process = "unknown";
  /// pid -> process name, used to attribute ART lines.
  std::map<std::int64_t, std::string> process_names;
};

/// Parses a logcat text. Threadtime stamps are rebased so the earliest stamped
/// line sits at t = 0.
void parse_logcat_text(std::string_view text, const LogcatOptions& options, const std::string& file_label,
                       ExperimentCapture& out);

/// Reads `logcat.txt`, `pss.csv` and `tasks.csv` (any may be absent) from `dir`.
ExperimentCapture ingest_experiment_dir(const std::string& dir, const LogcatOptions& options = {});

/// Every series for one experiment.
std::vector<model::MetricSeries> build_experiment_series(const ExperimentCapture& capture);

}  // namespace agingscope::ingest
