#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agingscope::model {

/// The five experimental factors. No other names are accepted.
enum class FactorName { DEV, VER, APP, EVENTS, STO };

inline constexpr std::array<FactorName, 5> kAllFactors = {
    FactorName::DEV, FactorName::VER, FactorName::APP, FactorName::EVENTS, FactorName::STO};

std::string_view to_string(FactorName f);
/// Case-insensitive; also accepts the manifest column names (dev, ver, ...).
/// Throws Error(InvalidArgument) on anything else.
FactorName parse_factor(std::string_view name);

struct ExperimentConfig {
  std::string id;
  std::map<FactorName, std::string> levels;
  double duration_s = 0.0;

  const std::string& level(FactorName f) const;
};

/// Validated, immutable experiment plan.
class ExperimentPlan {
 public:
  ExperimentPlan() = default;
  /// Validates: unique ids, all five factors present, duration > 0, no two
  /// experiments with identical levels. Level sets are derived from the configs.
  explicit ExperimentPlan(std::vector<ExperimentConfig> experiments);

  const std::vector<ExperimentConfig>& experiments() const { return experiments_; }
  const std::map<FactorName, std::set<std::string>>& level_sets() const { return level_sets_; }
  std::size_t size() const { return experiments_.size(); }
  const ExperimentConfig* find(std::string_view id) const;

  /// Sub-plan keeping experiments whose `factor` equals `level`.
  ExperimentPlan restrict(FactorName factor, std::string_view level) const;
  /// Sub-plan keeping the listed ids (plan order is preserved).
  ExperimentPlan restrict_ids(const std::set<std::string>& ids) const;

 private:
  std::vector<ExperimentConfig> experiments_;
  std::map<FactorName, std::set<std::string>> level_sets_;
};

/// Manifest schema: `id,dev,ver,app,events,sto,duration_s`.
ExperimentPlan parse_plan_csv(std::string_view text);
ExperimentPlan load_plan_file(const std::string& path);
std::string format_plan_csv(const ExperimentPlan& plan);

/// The 72-experiment case-study plan (6 h per experiment).
ExperimentPlan bundled_plan72();

struct FactorPartition {
  FactorName factor;
  std::string level_a;
  std::string level_b;
  std::vector<ExperimentConfig> configs_a;
  std::vector<ExperimentConfig> configs_b;
  std::vector<std::pair<std::string, std::string>> pairs;  // (idA, idB), plan order of A
};

/// One partition per unordered pair of levels (levels in lexicographic order).
/// Every config at either level must have exactly one counterpart, identical
/// in all other factors, at the other level.
std::vector<FactorPartition> partition_by_factor(const ExperimentPlan& plan, FactorName factor);

// ---------------------------------------------------------------------------

enum class SeriesKind { Instantaneous, Cumulative };

std::string_view to_string(SeriesKind k);
SeriesKind parse_series_kind(std::string_view s);

struct Sample {
  double t = 0.0;      // seconds since experiment start
  double value = 0.0;
  bool flagged = false;  // counter reset or perturbed duplicate timestamp
};

struct MetricSeries {
  std::string entity;
  std::string metric;
  std::string unit;
  SeriesKind kind = SeriesKind::Instantaneous;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  std::vector<double> times() const;
  std::vector<double> values() const;
};

/// Checks the MetricSeries invariants (t >= 0, strictly increasing, finite values).
void validate_series(const MetricSeries& s);

/// Builds an instantaneous series from parallel time/value vectors.
MetricSeries make_series(std::string entity, std::string metric, const std::vector<double>& t,
                         const std::vector<double>& values);

/// Per-interval deltas of a cumulative counter. A negative delta is treated as a
/// counter reset: the raw new value is used and the sample is flagged.
MetricSeries to_rate_series(const MetricSeries& s);

}  // namespace agingscope::model
