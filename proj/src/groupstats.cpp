#include "agingscope/groupstats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "agingscope/distributions.hpp"
#include "agingscope/error.hpp"

namespace agingscope::groupstats {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

void require_groups(const Groups& groups, std::size_t min_size) {
  if (groups.size() < 2) throw Error(ErrorCode::DegenerateGroups, "need at least two groups");
  for (const auto& g : groups)
    if (g.size() < min_size)
      throw Error(ErrorCode::DegenerateGroups,
                  "every group needs at least " + std::to_string(min_size) + " value(s)");
}

std::size_t total_size(const Groups& groups) {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

}  // namespace

FTest fisher_anova(const Groups& groups) {
  require_groups(groups, 1);
  const std::size_t k = groups.size();
  const std::size_t n = total_size(groups);
  if (n <= k) throw Error(ErrorCode::DegenerateGroups, "ANOVA needs more observations than groups");
  double grand = 0.0;
  for (const auto& g : groups) grand += std::accumulate(g.begin(), g.end(), 0.0);
  grand /= static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ssw += (x - m) * (x - m);
  }
  FTest out;
  out.df1 = static_cast<double>(k - 1);
  out.df2 = static_cast<double>(n - k);
  const double scale = std::max(1.0, std::fabs(grand));
  const double tiny = 1e-24 * scale * scale * static_cast<double>(n);
  if (ssw <= tiny) {
    if (ssb <= tiny) {
      out.statistic = 0.0;
      out.p_value = 1.0;
    } else {
      out.statistic = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
    }
    return out;
  }
  out.statistic = (ssb / out.df1) / (ssw / out.df2);
  out.p_value = dist::fisher_f_upper_p(out.statistic, out.df1, out.df2);
  return out;
}

FTest levene(const Groups& groups) {
  require_groups(groups, 2);
  Groups z;
  z.reserve(groups.size());
  for (const auto& g : groups) {
    const double m = mean_of(g);
    std::vector<double> d;
    d.reserve(g.size());
    for (double x : g) d.push_back(std::fabs(x - m));
    z.push_back(std::move(d));
  }
  return fisher_anova(z);
}

FTest welch_anova(const Groups& groups) {
  require_groups(groups, 2);
  const double k = static_cast<double>(groups.size());
  std::vector<double> w, m, ni;
  for (const auto& g : groups) {
    const double mu = mean_of(g);
    const double var = sample_variance(g, mu);
    if (!(var > 0.0)) throw Error(ErrorCode::ZeroGroupVariance, "Welch ANOVA needs nonzero variance in every group");
    ni.push_back(static_cast<double>(g.size()));
    m.push_back(mu);
    w.push_back(ni.back() / var);
  }
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  double wmean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) wmean += w[i] * m[i];
  wmean /= sw;
  double a = 0.0, lambda = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    a += w[i] * (m[i] - wmean) * (m[i] - wmean);
    const double r = 1.0 - w[i] / sw;
    lambda += r * r / (ni[i] - 1.0);
  }
  a /= (k - 1.0);
  const double b = 1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * lambda;
  FTest out;
  out.statistic = a / b;
  out.df1 = k - 1.0;
  out.df2 = (k * k - 1.0) / (3.0 * lambda);
  out.p_value = dist::fisher_f_upper_p(out.statistic, out.df1, out.df2);
  return out;
}

KruskalWallis kruskal_wallis(const Groups& groups) {
  require_groups(groups, 1);
  const std::size_t n = total_size(groups);
  if (n < 3) throw Error(ErrorCode::DegenerateGroups, "Kruskal-Wallis needs at least 3 observations");
  std::vector<double> pooled;
  pooled.reserve(n);
  for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
  const auto ranks = trend::mid_ranks(pooled);

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double nn = static_cast<double>(n);
  const double correction = 1.0 - ties / (nn * nn * nn - nn);
  if (correction <= 0.0) throw Error(ErrorCode::AllTied, "Kruskal-Wallis on identical values");

  double sum = 0.0;
  std::size_t pos = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[pos++];
    sum += r * r / static_cast<double>(g.size());
  }
  KruskalWallis out;
  out.h = std::max(0.0, (12.0 / (nn * (nn + 1.0)) * sum - 3.0 * (nn + 1.0)) / correction);
  out.df = static_cast<double>(groups.size() - 1);
  out.p_value = dist::chi_squared_upper_p(out.h, out.df);
  return out;
}

std::string_view to_string(RoutedTest t) {
  switch (t) {
    case RoutedTest::Fisher: return "FISHER";
    case RoutedTest::Welch: return "WELCH";
    case RoutedTest::KruskalWallis: return "KW";
  }
  return "?";
}

RoutedTest parse_routed_test(std::string_view s) {
  std::string u;
  for (char c : s)
    if (c != '-' && c != '_' && c != ' ') u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "FISHER") return RoutedTest::Fisher;
  if (u == "WELCH") return RoutedTest::Welch;
  if (u == "KW" || u == "KRUSKALWALLIS") return RoutedTest::KruskalWallis;
  throw Error(ErrorCode::InvalidArgument, "unknown routed test '" + std::string(s) + "'");
}

RoutedTest route_test(double shapiro_p, double levene_p, Alpha alpha) {
  if (shapiro_p < alpha.value()) return RoutedTest::KruskalWallis;
  return levene_p < alpha.value() ? RoutedTest::Welch : RoutedTest::Fisher;
}

GroupComparison compare_groups(const GroupedSlopes& grouped, Alpha alpha) {
  Groups groups;
  for (const auto& [level, values] : grouped.groups) groups.push_back(values);
  require_groups(groups, 2);

  std::vector<double> residuals;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    for (double x : g) residuals.push_back(x - m);
  }
  GroupComparison out;
  out.shapiro_p = shapiro_wilk(residuals).p_value;
  out.normal = out.shapiro_p >= alpha.value();
  out.levene_p = levene(groups).p_value;
  out.homoscedastic = out.levene_p >= alpha.value();
  out.routed_test = route_test(out.shapiro_p, out.levene_p, alpha);
  switch (out.routed_test) {
    case RoutedTest::Fisher: {
      auto f = fisher_anova(groups);
      out.statistic = f.statistic;
      out.p_value = f.p_value;
      break;
    }
    case RoutedTest::Welch: {
      auto f = welch_anova(groups);
      out.statistic = f.statistic;
      out.p_value = f.p_value;
      break;
    }
    case RoutedTest::KruskalWallis: {
      auto h = kruskal_wallis(groups);
      out.statistic = h.h;
      out.p_value = h.p_value;
      break;
    }
  }
  out.significant = out.p_value < alpha.value();
  return out;
}

CorrelationResult spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "correlation inputs differ in length");
  if (x.size() < 4) throw Error(ErrorCode::TooShort, "correlation needs at least 4 pairs");
  CorrelationResult out;
  out.n = x.size();
  out.rho = std::clamp(trend::spearman_rho(x, y), -1.0, 1.0);
  out.p_value = trend::spearman_p_value(out.rho, out.n);
  return out;
}

}  // namespace agingscope::groupstats
