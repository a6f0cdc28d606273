#include "agingscope/trend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "agingscope/distributions.hpp"
#include "agingscope/error.hpp"

namespace agingscope::trend {

std::string_view to_string(TestName t) {
  switch (t) {
    case TestName::MK: return "MK";
    case TestName::MK_HamedRao: return "MK_HamedRao";
    case TestName::CoxStuart: return "CoxStuart";
    case TestName::TTest: return "TTest";
    case TestName::SpearmanRho: return "SpearmanRho";
    case TestName::DurbinWatson: return "DurbinWatson";
  }
  return "?";
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Reject: return "reject";
    case Decision::FailToReject: return "fail_to_reject";
    case Decision::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(AutocorrRoute r) {
  return r == AutocorrRoute::PlainMK ? "plain_MK" : "modified_MK";
}

TestName parse_test_name(std::string_view s) {
  for (TestName t : {TestName::MK, TestName::MK_HamedRao, TestName::CoxStuart, TestName::TTest,
                     TestName::SpearmanRho, TestName::DurbinWatson})
    if (s == to_string(t)) return t;
  throw Error(ErrorCode::InvalidArgument, "unknown test '" + std::string(s) + "'");
}

Decision parse_decision(std::string_view s) {
  for (Decision d : {Decision::Reject, Decision::FailToReject, Decision::Inconclusive})
    if (s == to_string(d)) return d;
  throw Error(ErrorCode::InvalidArgument, "unknown decision '" + std::string(s) + "'");
}

AutocorrRoute parse_route(std::string_view s) {
  if (s == "plain_MK") return AutocorrRoute::PlainMK;
  if (s == "modified_MK") return AutocorrRoute::ModifiedMK;
  throw Error(ErrorCode::InvalidArgument, "unknown route '" + std::string(s) + "'");
}

Alpha::Alpha(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0))
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
}

Decision decide(double p_value, Alpha alpha) {
  return p_value < alpha.value() ? Decision::Reject : Decision::FailToReject;
}

const TestResult* TrendVerdict::find(TestName name) const {
  for (const auto& t : tests)
    if (t.name == name) return &t;
  return nullptr;
}

namespace {

void require_length(std::size_t n, std::size_t min, std::string_view what) {
  if (n < min)
    throw Error(ErrorCode::TooShort, std::string(what) + " needs at least " + std::to_string(min) +
                                         " samples, got " + std::to_string(n));
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double sxx = 0.0;
};

LineFit least_squares(std::span<const double> t, std::span<const double> x) {
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxx += (t[i] - mt) * (t[i] - mt);
    sxy += (t[i] - mt) * (x[i] - mx);
  }
  LineFit f;
  f.sxx = sxx;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = mx - f.slope * mt;
  return f;
}

std::vector<double> residuals_of(std::span<const double> t, std::span<const double> x, const LineFit& f) {
  std::vector<double> e(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) e[i] = x[i] - (f.intercept + f.slope * t[i]);
  return e;
}

// Savin-White table, one regressor, alpha = 0.05.
struct DwRow {
  int n;
  double dl, du;
};
constexpr std::array<DwRow, 49> kDwTable = {{
    {6, 0.610, 1.400},   {7, 0.700, 1.356},   {8, 0.763, 1.332},   {9, 0.824, 1.320},
    {10, 0.879, 1.320},  {11, 0.927, 1.324},  {12, 0.971, 1.331},  {13, 1.010, 1.340},
    {14, 1.045, 1.350},  {15, 1.077, 1.361},  {16, 1.106, 1.371},  {17, 1.133, 1.381},
    {18, 1.158, 1.391},  {19, 1.180, 1.401},  {20, 1.201, 1.411},  {21, 1.221, 1.420},
    {22, 1.239, 1.429},  {23, 1.257, 1.437},  {24, 1.273, 1.446},  {25, 1.288, 1.454},
    {26, 1.302, 1.461},  {27, 1.316, 1.469},  {28, 1.328, 1.476},  {29, 1.341, 1.483},
    {30, 1.352, 1.489},  {31, 1.363, 1.496},  {32, 1.373, 1.502},  {33, 1.383, 1.508},
    {34, 1.393, 1.514},  {35, 1.402, 1.519},  {36, 1.411, 1.525},  {37, 1.419, 1.530},
    {38, 1.427, 1.535},  {39, 1.435, 1.540},  {40, 1.442, 1.544},  {45, 1.475, 1.566},
    {50, 1.503, 1.585},  {55, 1.528, 1.601},  {60, 1.549, 1.616},  {65, 1.567, 1.629},
    {70, 1.583, 1.641},  {75, 1.598, 1.652},  {80, 1.611, 1.662},  {85, 1.624, 1.671},
    {90, 1.635, 1.679},  {95, 1.645, 1.687},  {100, 1.654, 1.694}, {150, 1.720, 1.746},
    {200, 1.758, 1.778},
}};

}  // namespace

// --- Durbin-Watson -------------------------------------------------------------

DwBounds durbin_watson_bounds(std::size_t n) {
  require_length(n, 6, "Durbin-Watson");
  if (n >= static_cast<std::size_t>(kDwTable.back().n)) return {kDwTable.back().dl, kDwTable.back().du};
  for (std::size_t i = 0; i + 1 < kDwTable.size(); ++i) {
    const auto& a = kDwTable[i];
    const auto& b = kDwTable[i + 1];
    if (n >= static_cast<std::size_t>(a.n) && n <= static_cast<std::size_t>(b.n)) {
      double w = (static_cast<double>(n) - a.n) / (b.n - a.n);
      return {a.dl + w * (b.dl - a.dl), a.du + w * (b.du - a.du)};
    }
  }
  return {kDwTable.back().dl, kDwTable.back().du};
}

double durbin_watson_statistic(std::span<const double> e) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    den += e[i] * e[i];
    if (i > 0) num += (e[i] - e[i - 1]) * (e[i] - e[i - 1]);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

TestResult durbin_watson_residuals(std::span<const double> residuals) {
  const DwBounds b = durbin_watson_bounds(residuals.size());
  const double d = durbin_watson_statistic(residuals);
  TestResult r;
  r.name = TestName::DurbinWatson;
  r.statistic = d;
  if (d > b.upper && 4.0 - d > b.upper)
    r.decision = Decision::FailToReject;
  else if (d < b.lower || 4.0 - d < b.lower)
    r.decision = Decision::Reject;
  else
    r.decision = Decision::Inconclusive;
  return r;
}

TestResult durbin_watson(const model::MetricSeries& series) {
  require_length(series.size(), 6, "Durbin-Watson");
  const auto t = series.times();
  const auto x = series.values();
  const LineFit fit = least_squares(t, x);
  if (fit.sxx == 0.0) throw Error(ErrorCode::ZeroVariance, "all timestamps equal");
  auto e = residuals_of(t, x, fit);
  // Residuals at rounding-noise level relative to the data are a perfect fit.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::fabs(v));
  double emax = 0.0;
  for (double v : e) emax = std::max(emax, std::fabs(v));
  if (emax <= 1e-12 * std::max(scale, 1.0)) std::fill(e.begin(), e.end(), 0.0);
  return durbin_watson_residuals(e);
}

// --- Mann-Kendall ----------------------------------------------------------

long long mann_kendall_s(std::span<const double> x) {
  long long s = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += (x[j] > x[i]) - (x[j] < x[i]);
  return s;
}

namespace {

// Sizes of groups of equal values (only groups of size >= 2).
std::vector<std::size_t> tie_groups(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  std::vector<std::size_t> groups;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    if (j - i > 1) groups.push_back(j - i);
    i = j;
  }
  return groups;
}

double mk_z(long long s, double var_s) {
  if (s == 0 || var_s <= 0.0) return 0.0;
  const double sd = std::sqrt(var_s);
  return s > 0 ? (static_cast<double>(s) - 1.0) / sd : (static_cast<double>(s) + 1.0) / sd;
}

TestResult to_result(TestName name, const MannKendallStats& st, Alpha alpha) {
  TestResult r;
  r.name = name;
  r.statistic = static_cast<double>(st.s);
  r.p_value = st.p_value;
  r.decision = decide(st.p_value, alpha);
  return r;
}

}  // namespace

double mann_kendall_variance(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double v = n * (n - 1.0) * (2.0 * n + 5.0);
  for (std::size_t g : tie_groups(x)) {
    const double t = static_cast<double>(g);
    v -= t * (t - 1.0) * (2.0 * t + 5.0);
  }
  return v / 18.0;
}

double mann_kendall_exact_p(long long s, std::size_t n) {
  if (n < 2) return 1.0;
  if (n > 20) throw Error(ErrorCode::InvalidArgument, "exact MK distribution limited to n <= 20");
  // Inversion-count distribution of a random permutation, built one element at a time.
  std::vector<double> f{1.0};
  for (std::size_t m = 2; m <= n; ++m) {
    std::vector<double> g(f.size() + m - 1, 0.0);
    for (std::size_t k = 0; k < f.size(); ++k)
      for (std::size_t j = 0; j < m; ++j) g[k + j] += f[k] / static_cast<double>(m);
    f = std::move(g);
  }
  const long long pairs = static_cast<long long>(n * (n - 1) / 2);
  const long long target = s < 0 ? -s : s;
  double p = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    long long sk = pairs - 2 * static_cast<long long>(k);
    if ((sk < 0 ? -sk : sk) >= target) p += f[k];
  }
  return std::clamp(p, 0.0, 1.0);
}

MannKendallStats mann_kendall_stats(std::span<const double> x) {
  require_length(x.size(), 4, "Mann-Kendall");
  MannKendallStats st;
  st.s = mann_kendall_s(x);
  st.var_s = mann_kendall_variance(x);
  st.z = mk_z(st.s, st.var_s);
  if (st.var_s <= 0.0) {
    st.p_value = 1.0;
  } else if (x.size() <= 10 && tie_groups(x).empty()) {
    st.exact = true;
    st.p_value = mann_kendall_exact_p(st.s, x.size());
  } else {
    st.p_value = dist::normal_two_sided_p(st.z);
  }
  return st;
}

TestResult mann_kendall(const model::MetricSeries& series, Alpha alpha) {
  return to_result(TestName::MK, mann_kendall_stats(series.values()), alpha);
}

namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// 1-based order statistic.
double order_stat(std::vector<double>& v, std::size_t rank) {
  auto it = v.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(v.begin(), it, v.end());
  return *it;
}

std::vector<double> pairwise_slopes(std::span<const double> t, std::span<const double> x) {
  std::vector<double> slopes;
  slopes.reserve(t.size() * (t.size() - 1) / 2);
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (t[j] != t[i]) slopes.push_back((x[j] - x[i]) / (t[j] - t[i]));
  return slopes;
}

const double kZ975 = dist::normal_upper_quantile(0.025);

MannKendallStats hamed_rao_with_slope(std::span<const double> t, std::span<const double> x,
                                      double sen) {
  const std::size_t n = x.size();
  MannKendallStats plain = mann_kendall_stats(x);

  std::vector<double> detrended(n);
  for (std::size_t i = 0; i < n; ++i) detrended[i] = x[i] - sen * t[i];
  const std::vector<double> r = mid_ranks(detrended);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  double c0 = 0.0;
  for (double v : r) c0 += (v - mean) * (v - mean);

  const double nd = static_cast<double>(n);
  const double bound = kZ975 / std::sqrt(nd);
  const std::size_t max_lag = std::min(n - 3, n / 4);
  double acc = 0.0;
  if (c0 > 0.0) {
    for (std::size_t k = 1; k <= max_lag; ++k) {
      double ck = 0.0;
      for (std::size_t i = 0; i + k < n; ++i) ck += (r[i] - mean) * (r[i + k] - mean);
      const double rho = ck / c0;
      // only the leading run of significant lags; later crossings are mostly sampling noise
      if (std::fabs(rho) <= bound) break;
      const double m = nd - static_cast<double>(k);
      acc += m * (m - 1.0) * (m - 2.0) * rho;
    }
  }
  if (acc == 0.0) return plain;  // correction factor exactly 1

  MannKendallStats st = plain;
  st.exact = false;
  // Strong negative serial correlation can drive the factor to <= 0; floor it.
  st.variance_factor = std::max(1.0 + 2.0 / (nd * (nd - 1.0) * (nd - 2.0)) * acc, 1.0 / nd);
  const double var = st.var_s * st.variance_factor;
  st.z = mk_z(st.s, var);
  st.p_value = var > 0.0 ? dist::normal_two_sided_p(st.z) : 1.0;
  return st;
}

}  // namespace

MannKendallStats mann_kendall_hamed_rao_stats(std::span<const double> t, std::span<const double> x) {
  require_length(x.size(), 10, "Hamed-Rao Mann-Kendall");
  if (t.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "times and values differ in length");
  auto slopes = pairwise_slopes(t, x);
  if (slopes.empty()) throw Error(ErrorCode::ZeroVariance, "all timestamps equal");
  return hamed_rao_with_slope(t, x, median_inplace(slopes));
}

TestResult mann_kendall_hamed_rao(const model::MetricSeries& series, Alpha alpha) {
  return to_result(TestName::MK_HamedRao, mann_kendall_hamed_rao_stats(series.times(), series.values()),
                   alpha);
}

// --- Cox-Stuart ----------------------------------------------------------------

CoxStuartStats cox_stuart_stats(std::span<const double> x) {
  require_length(x.size(), 6, "Cox-Stuart");
  const std::size_t half = x.size() / 2;
  const std::size_t offset = x.size() - half;  // skips the middle element when n is odd
  CoxStuartStats st;
  for (std::size_t i = 0; i < half; ++i) {
    const double d = x[i + offset] - x[i];
    if (d == 0.0) continue;
    ++st.pairs;
    if (d > 0.0) ++st.positive;
  }
  if (st.pairs == 0) throw Error(ErrorCode::AllTied, "Cox-Stuart: every pair is tied");
  const auto m = static_cast<std::int64_t>(st.pairs);
  const auto k = static_cast<std::int64_t>(st.positive);
  st.p_value = std::min(1.0, 2.0 * dist::binomial_half_cdf(std::min(k, m - k), m));
  return st;
}

TestResult cox_stuart(const model::MetricSeries& series, Alpha alpha) {
  const auto st = cox_stuart_stats(series.values());
  TestResult r;
  r.name = TestName::CoxStuart;
  r.statistic = static_cast<double>(st.positive);
  r.p_value = st.p_value;
  r.decision = decide(st.p_value, alpha);
  return r;
}

// --- Regression t-test ---------------------------------------------------------

RegressionStats t_test_trend_stats(std::span<const double> t, std::span<const double> x) {
  require_length(x.size(), 4, "t-test");
  if (t.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "times and values differ in length");
  const LineFit fit = least_squares(t, x);
  if (fit.sxx == 0.0) throw Error(ErrorCode::ZeroVariance, "all timestamps equal");
  RegressionStats st;
  st.slope = fit.slope;
  st.intercept = fit.intercept;
  const auto e = residuals_of(t, x, fit);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double sse = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sse += e[i] * e[i];
    syy += (x[i] - mx) * (x[i] - mx);
  }
  const double df = static_cast<double>(x.size()) - 2.0;
  if (sse <= 1e-24 * syy || syy == 0.0) {
    // Perfect fit: any nonzero slope is significant.
    st.se_slope = 0.0;
    const bool flat = syy == 0.0 || fit.slope == 0.0;
    st.t = flat ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
    st.p_value = flat ? 1.0 : 0.0;
    return st;
  }
  st.se_slope = std::sqrt(sse / df / fit.sxx);
  st.t = fit.slope / st.se_slope;
  st.p_value = dist::student_t_two_sided_p(st.t, df);
  return st;
}

TestResult t_test_trend(const model::MetricSeries& series, Alpha alpha) {
  const auto st = t_test_trend_stats(series.times(), series.values());
  TestResult r;
  r.name = TestName::TTest;
  r.statistic = st.t;
  r.p_value = st.p_value;
  r.decision = decide(st.p_value, alpha);
  return r;
}

// --- Spearman rho ----------------------------------------------------------

std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && x[idx[j]] == x[idx[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) r[idx[k]] = rank;
    i = j;
  }
  return r;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "samples differ in length");
  const auto ra = mid_ranks(a);
  const auto rb = mid_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error(ErrorCode::AllTied, "Spearman: constant ranks");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman_p_value(double rho, std::size_t n) {
  if (std::fabs(rho) >= 1.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  return dist::student_t_two_sided_p(t, df);
}

TestResult spearman_rho_trend(const model::MetricSeries& series, Alpha alpha) {
  require_length(series.size(), 4, "Spearman rho");
  const double rho = spearman_rho(series.values(), series.times());
  TestResult r;
  r.name = TestName::SpearmanRho;
  r.statistic = rho;
  r.p_value = spearman_p_value(rho, series.size());
  r.decision = decide(*r.p_value, alpha);
  return r;
}

// --- Sen slope -----------------------------------------------------------------

SenSlope sen_slope(std::span<const double> t, std::span<const double> x, Alpha alpha) {
  require_length(x.size(), 2, "Sen slope");
  if (t.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "times and values differ in length");
  auto slopes = pairwise_slopes(t, x);
  if (slopes.empty()) throw Error(ErrorCode::ZeroVariance, "all timestamps equal");
  SenSlope out;
  out.slope = median_inplace(slopes);

  const double n_pairs = static_cast<double>(slopes.size());
  const double c = dist::normal_upper_quantile(alpha.value() / 2.0) * std::sqrt(mann_kendall_variance(x));
  auto clamp_rank = [&](double r) {
    return static_cast<std::size_t>(std::clamp(std::round(r), 1.0, n_pairs));
  };
  out.ci_low = std::min(out.slope, order_stat(slopes, clamp_rank((n_pairs - c) / 2.0)));
  out.ci_high = std::max(out.slope, order_stat(slopes, clamp_rank((n_pairs + c) / 2.0 + 1.0)));

  std::vector<double> offsets(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) offsets[i] = x[i] - out.slope * t[i];
  out.intercept = median_inplace(offsets);
  return out;
}

SenSlope sen_slope(const model::MetricSeries& series, Alpha alpha) {
  return sen_slope(series.times(), series.values(), alpha);
}

// --- Battery -------------------------------------------------------------------

namespace {

template <typename Fn>
TestResult tolerate_ties(TestName name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllTied) throw;
    TestResult r;
    r.name = name;
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.decision = Decision::FailToReject;
    return r;
  }
}

}  // namespace

TrendVerdict detect_trend(const model::MetricSeries& series, Alpha alpha) {
  require_length(series.size(), kMinTrendSamples, "trend detection");
  const auto t = series.times();
  const auto x = series.values();

  TrendVerdict v;
  v.series_id = series.entity + "/" + series.metric;
  v.n = series.size();

  const TestResult dw = durbin_watson(series);
  v.dw_statistic = dw.statistic;
  v.dw_decision = dw.decision;
  v.tests.push_back(dw);

  const SenSlope sen = sen_slope(t, x, alpha);
  v.slope = sen.slope;
  v.ci_low = sen.ci_low;
  v.ci_high = sen.ci_high;
  v.intercept = sen.intercept;

  TestResult mk;
  if (dw.decision == Decision::FailToReject) {
    v.route = AutocorrRoute::PlainMK;
    mk = to_result(TestName::MK, mann_kendall_stats(x), alpha);
  } else {
    v.route = AutocorrRoute::ModifiedMK;
    mk = to_result(TestName::MK_HamedRao, hamed_rao_with_slope(t, x, sen.slope), alpha);
  }
  v.tests.push_back(mk);

  int confirmations = 0;
  for (const TestResult& r :
       {tolerate_ties(TestName::CoxStuart, [&] { return cox_stuart(series, alpha); }),
        t_test_trend(series, alpha),
        tolerate_ties(TestName::SpearmanRho, [&] { return spearman_rho_trend(series, alpha); })}) {
    if (r.decision == Decision::Reject) ++confirmations;
    v.tests.push_back(r);
  }
  v.declared = mk.decision == Decision::Reject && confirmations >= 2;
  return v;
}

}  // namespace agingscope::trend
