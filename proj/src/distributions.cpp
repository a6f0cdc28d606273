#include "agingscope/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace agingscope::dist {

namespace bm = boost::math;

double normal_cdf(double z) {
  if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
  return bm::cdf(bm::normal_distribution<>(), z);
}

double normal_upper_quantile(double p) {
  return bm::quantile(bm::complement(bm::normal_distribution<>(), p));
}

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return 1.0;
  double a = std::fabs(z);
  if (std::isinf(a)) return 0.0;
  return std::min(1.0, 2.0 * bm::cdf(bm::complement(bm::normal_distribution<>(), a)));
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  double a = std::fabs(t);
  if (std::isinf(a)) return 0.0;
  return std::min(1.0, 2.0 * bm::cdf(bm::complement(bm::students_t_distribution<>(df), a)));
}

double fisher_f_upper_p(double f, double df1, double df2) {
  if (std::isnan(f) || f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return bm::cdf(bm::complement(bm::fisher_f_distribution<>(df1, df2), f));
}

double chi_squared_upper_p(double x, double df) {
  if (std::isnan(x) || x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return bm::cdf(bm::complement(bm::chi_squared_distribution<>(df), x));
}

double binomial_half_cdf(std::int64_t k, std::int64_t n) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return bm::cdf(bm::binomial_distribution<>(static_cast<double>(n), 0.5), static_cast<double>(k));
}

}  // namespace agingscope::dist
