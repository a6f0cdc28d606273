// Shapiro-Wilk W and its p-value following Royston (1995), algorithm AS R94.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agingscope/distributions.hpp"
#include "agingscope/error.hpp"
#include "agingscope/groupstats.hpp"

namespace agingscope::groupstats {

namespace {

// c[0] + c[1] x + ... + c[k-1] x^(k-1)
double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kC3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kC4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kC5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kC6[] = {-0.4803, -0.082676, 0.0030302};
constexpr double kG[] = {-2.273, 0.459};

// Coefficients a_1..a_{n/2} for the lower half (a_i pairs x_(n+1-i) - x_(i)).
std::vector<double> coefficients(std::size_t n) {
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    const double p = (static_cast<double>(i + 1) - 0.375) / (an + 0.25);
    m[i] = -dist::normal_upper_quantile(p);
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(kC1, rsn) - m[0] / ssumm2;
  std::size_t first = 1;
  double fac;
  if (n > 5) {
    const double a2 = -m[1] / ssumm2 + poly(kC2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
    first = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
  }
  a[0] = a1;
  for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

}  // namespace

ShapiroWilk shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw Error(ErrorCode::TooShort, "Shapiro-Wilk needs at least 3 values");
  if (n > 5000) throw Error(ErrorCode::InvalidArgument, "Shapiro-Wilk supports at most 5000 values");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (!(range > 1e-19 * std::max(1.0, std::fabs(x.front()))))
    throw Error(ErrorCode::ZeroRange, "Shapiro-Wilk on constant data");

  const auto a = coefficients(n);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += ((v - mean) / range) * ((v - mean) / range);
  double b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) b += a[i] * (x[n - 1 - i] - x[i]) / range;
  double w = std::min(1.0, b * b / ss);

  ShapiroWilk out;
  out.w = w;
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;   // 6 / pi
    constexpr double stqr = 1.04719755119660;  // pi / 3
    w = std::max(w, 0.75);
    out.w = w;
    out.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return out;
  }
  if (w >= 1.0) {
    out.p_value = 1.0;
    return out;
  }
  const double an = static_cast<double>(n);
  double y = std::log(1.0 - w);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(kG, an);
    if (y >= gamma) {
      out.p_value = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    mu = poly(kC3, an);
    sigma = std::exp(poly(kC4, an));
  } else {
    const double xx = std::log(an);
    mu = poly(kC5, xx);
    sigma = std::exp(poly(kC6, xx));
  }
  out.p_value = dist::normal_cdf((mu - y) / sigma);
  return out;
}

}  // namespace agingscope::groupstats
