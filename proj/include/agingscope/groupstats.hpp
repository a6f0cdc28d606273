#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agingscope/model.hpp"
#include "agingscope/trend.hpp"

namespace agingscope::groupstats {

using trend::Alpha;
using Groups = std::vector<std::vector<double>>;

struct ShapiroWilk {
  double w = 1.0;
  double p_value = 1.0;
};

/// Royston's approximation (AS R94). Requires 3 <= n <= 5000.
ShapiroWilk shapiro_wilk(std::span<const double> sample);

struct FTest {
  double statistic = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
};

/// Mean-centred Levene test: one-way ANOVA on |x - group mean|.
FTest levene(const Groups& groups);
/// Classic one-way ANOVA. With zero within-group variance, p is 0 when the
/// group means differ and 1 otherwise.
FTest fisher_anova(const Groups& groups);
/// Welch's heteroscedastic one-way ANOVA.
FTest welch_anova(const Groups& groups);

struct KruskalWallis {
  double h = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Tie-corrected Kruskal-Wallis H with a chi-square reference.
KruskalWallis kruskal_wallis(const Groups& groups);

enum class RoutedTest { Fisher, Welch, KruskalWallis };
std::string_view to_string(RoutedTest t);
RoutedTest parse_routed_test(std::string_view s);

/// Normal (shapiro_p >= alpha) and homoscedastic (levene_p >= alpha) picks
/// Fisher, normal only picks Welch, otherwise Kruskal-Wallis.
RoutedTest route_test(double shapiro_p, double levene_p, Alpha alpha = {});

struct GroupedSlopes {
  model::FactorName factor = model::FactorName::DEV;
  std::map<std::string, std::vector<double>> groups;  // level -> one value per experiment
};

struct GroupComparison {
  double shapiro_p = 1.0;
  bool normal = true;
  double levene_p = 1.0;
  bool homoscedastic = true;
  RoutedTest routed_test = RoutedTest::Fisher;
  double statistic = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

/// Normality is checked on the pooled residuals (values minus their group mean).
GroupComparison compare_groups(const GroupedSlopes& grouped, Alpha alpha = {});

struct CorrelationResult {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Spearman rank correlation; requires equal lengths and n >= 4.
CorrelationResult spearman_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace agingscope::groupstats
