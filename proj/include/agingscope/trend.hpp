#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agingscope/model.hpp"

namespace agingscope::trend {

enum class TestName { MK, MK_HamedRao, CoxStuart, TTest, SpearmanRho, DurbinWatson };
enum class Decision { Reject, FailToReject, Inconclusive };
enum class AutocorrRoute { PlainMK, ModifiedMK };

std::string_view to_string(TestName t);
std::string_view to_string(Decision d);
std::string_view to_string(AutocorrRoute r);
TestName parse_test_name(std::string_view s);
Decision parse_decision(std::string_view s);
AutocorrRoute parse_route(std::string_view s);

/// Significance level, 0 < value < 1.
class Alpha {
 public:
  constexpr Alpha() = default;
  explicit Alpha(double value);
  constexpr double value() const { return value_; }

 private:
  double value_ = 0.05;
};

struct TestResult {
  TestName name = TestName::MK;
  double statistic = 0.0;
  std::optional<double> p_value;  // absent only for DurbinWatson
  Decision decision = Decision::FailToReject;
};

/// Two-sided decision from a p-value.
Decision decide(double p_value, Alpha alpha);

// --- Durbin-Watson ---------------------------------------------------------

struct DwBounds {
  double lower;  // dL
  double upper;  // dU
};

/// Critical bounds for one regressor at the 5% level, linearly interpolated in n
/// and clamped at the largest tabulated n (200). Requires n >= 6.
DwBounds durbin_watson_bounds(std::size_t n);
/// d = sum (e_t - e_{t-1})^2 / sum e_t^2; 0 when every residual is zero.
double durbin_watson_statistic(std::span<const double> residuals);
/// Decision on given residuals: Reject means autocorrelation (d or 4-d below dL),
/// FailToReject means none (both above dU), otherwise Inconclusive.
TestResult durbin_watson_residuals(std::span<const double> residuals);
/// Uses the residuals of the least-squares line of value on time.
TestResult durbin_watson(const model::MetricSeries& series);

// --- Mann-Kendall ----------------------------------------------------------

struct MannKendallStats {
  long long s = 0;
  double var_s = 0.0;           // tie-corrected, before any autocorrelation correction
  double variance_factor = 1.0; // n/n* applied by the Hamed-Rao variant
  double z = 0.0;
  double p_value = 1.0;
  bool exact = false;           // p from the enumerated null distribution
};

long long mann_kendall_s(std::span<const double> x);
/// Var(S) = [n(n-1)(2n+5) - sum_ties t(t-1)(2t+5)] / 18.
double mann_kendall_variance(std::span<const double> x);
/// Exact two-sided P(|S| >= |s|) for n untied values (n <= 20).
double mann_kendall_exact_p(long long s, std::size_t n);

/// n <= 10 without ties: exact null distribution; otherwise normal approximation
/// with continuity correction. Requires n >= 4.
MannKendallStats mann_kendall_stats(std::span<const double> x);
TestResult mann_kendall(const model::MetricSeries& series, Alpha alpha = {});

/// Hamed-Rao variance correction. Requires n >= 10.
MannKendallStats mann_kendall_hamed_rao_stats(std::span<const double> t, std::span<const double> x);
TestResult mann_kendall_hamed_rao(const model::MetricSeries& series, Alpha alpha = {});

// --- Confirmation tests ----------------------------------------------------

struct CoxStuartStats {
  std::size_t pairs = 0;     // untied pairs
  std::size_t positive = 0;  // pairs with a positive difference
  double p_value = 1.0;
};

CoxStuartStats cox_stuart_stats(std::span<const double> x);
TestResult cox_stuart(const model::MetricSeries& series, Alpha alpha = {});

struct RegressionStats {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

RegressionStats t_test_trend_stats(std::span<const double> t, std::span<const double> x);
TestResult t_test_trend(const model::MetricSeries& series, Alpha alpha = {});

/// Mid-ranks (1-based) of the values.
std::vector<double> mid_ranks(std::span<const double> x);
/// Pearson correlation of the mid-ranks; throws AllTied when either side is constant.
double spearman_rho(std::span<const double> a, std::span<const double> b);
/// Two-sided p for rho with n observations, t approximation on n-2 df; |rho| = 1 gives 0.
double spearman_p_value(double rho, std::size_t n);
TestResult spearman_rho_trend(const model::MetricSeries& series, Alpha alpha = {});

// --- Sen slope ----------------------------------------------------------------

struct SenSlope {
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double intercept = 0.0;
};

SenSlope sen_slope(std::span<const double> t, std::span<const double> x, Alpha alpha = {});
SenSlope sen_slope(const model::MetricSeries& series, Alpha alpha = {});

// --- Battery -----------------------------------------------------------------

struct TrendVerdict {
  std::string series_id;
  std::size_t n = 0;
  AutocorrRoute route = AutocorrRoute::PlainMK;
  double dw_statistic = 0.0;
  Decision dw_decision = Decision::Inconclusive;
  std::vector<TestResult> tests;  // DW, MK or MK_HamedRao, CoxStuart, TTest, SpearmanRho
  bool declared = false;
  double slope = 0.0;  // value units per second
  double ci_low = 0.0;
  double ci_high = 0.0;
  double intercept = 0.0;

  const TestResult* find(TestName name) const;
  bool increasing() const { return declared && slope > 0.0; }
};

inline constexpr std::size_t kMinTrendSamples = 10;

/// Durbin-Watson routes to plain MK (no autocorrelation) or the Hamed-Rao variant
/// (autocorrelation or inconclusive). A trend is declared when the routed MK test
/// and at least two of {Cox-Stuart, t-test, Spearman rho} reject at alpha.
TrendVerdict detect_trend(const model::MetricSeries& series, Alpha alpha = {});

}  // namespace agingscope::trend
