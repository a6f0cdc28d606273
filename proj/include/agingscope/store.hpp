#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agingscope/model.hpp"
#include "agingscope/trend.hpp"

namespace agingscope::store {

// --- series store ---------------------------------------------------------------

/// One file per experiment with schema `entity,metric,kind,t_s,value`.
std::string format_series_store(std::span<const model::MetricSeries> series);
/// Groups rows by (entity, metric) in order of first appearance.
std::vector<model::MetricSeries> parse_series_store(std::string_view text);
void write_series_store(const std::string& path, std::span<const model::MetricSeries> series);
std::vector<model::MetricSeries> load_series_store(const std::string& path);

inline constexpr std::string_view kSeriesStoreSuffix = ".series.csv";

// --- verdicts -----------------------------------------------------------------

struct VerdictRecord {
  std::string experiment;
  std::string entity;
  std::string metric;
  std::string transform = "raw";  // "raw" or "rate" (differenced counter)
  trend::TrendVerdict verdict;
};

struct SkippedSeries {
  std::string experiment;
  std::string entity;
  std::string metric;
  std::size_t n = 0;
  std::string reason;
};

struct VerdictSet {
  double alpha = 0.05;
  std::vector<VerdictRecord> verdicts;
  std::vector<SkippedSeries> skipped;
};

/// Canonical JSON (sorted keys, two-space indent).
std::string format_verdicts_json(const VerdictSet& set);
VerdictSet parse_verdicts_json(std::string_view text);
/// Flat CSV, one row per verdict; skipped series are not included.
std::string format_verdicts_csv(const VerdictSet& set);
VerdictSet parse_verdicts_csv(std::string_view text);

/// Reads JSON or CSV, decided by the first non-blank character.
VerdictSet load_verdicts(const std::string& path);

}  // namespace agingscope::store
