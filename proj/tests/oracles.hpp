#pragma once

// Brute-force reference computations, written independently of the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

inline int sgn(double v) { return (v > 0) - (v < 0); }

inline long long mk_s(const std::vector<double>& x) {
  long long s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) s += sgn(x[j] - x[i]);
  return s;
}

// Var(S) under random permutation of the observed values. Each pair of pairs
// contributes E[sgn * sgn]: A for the same pair, +B when one index is shared in
// the same role, -B when it is shared in opposite roles, 0 when disjoint.
inline double mk_var_s(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double a = 0, b = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      a += std::abs(sgn(x[j] - x[i]));
      na += 1;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        b += sgn(x[j] - x[i]) * sgn(x[k] - x[i]);
        nb += 1;
      }
    }
  a /= na;
  b = nb > 0 ? b / nb : 0.0;
  double var = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          if (i == k && j == l) {
            var += a;
          } else if (i == k || j == l) {
            var += b;
          } else if (i == l || j == k) {
            var -= b;
          }
        }
  return var;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline double sen_slope(const std::vector<double>& t, const std::vector<double>& x) {
  std::vector<double> slopes;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j)
      if (t[j] != t[i]) slopes.push_back((x[j] - x[i]) / (t[j] - t[i]));
  return median(slopes);
}

// Kruskal-Wallis H with mid-ranks counted by comparison and the tie correction.
inline double kw_h(const std::vector<std::vector<double>>& groups) {
  std::vector<double> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  const double n = static_cast<double>(all.size());
  auto rank_of = [&](double v) {
    double less = 0, equal = 0;
    for (double w : all) {
      if (w < v) less += 1;
      if (w == v) equal += 1;
    }
    return less + (equal + 1) / 2;
  };
  double h = 0;
  for (const auto& g : groups) {
    double r = 0;
    for (double v : g) r += rank_of(v);
    h += r * r / static_cast<double>(g.size());
  }
  h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1);
  std::map<double, double> counts;
  for (double v : all) counts[v] += 1;
  double ties = 0;
  for (const auto& [v, c] : counts) ties += c * c * c - c;
  return h / (1 - ties / (n * n * n - n));
}

inline long double choose(int n, int k) {
  long double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Two-sided sign-test p over the untied first-half/second-half pairs.
inline double cox_stuart_p(const std::vector<double>& x) {
  const std::size_t half = x.size() / 2;
  const std::size_t off = x.size() - half;
  int m = 0, k = 0;
  for (std::size_t i = 0; i < half; ++i) {
    const double d = x[i + off] - x[i];
    if (d == 0) continue;
    ++m;
    if (d > 0) ++k;
  }
  const int lo = std::min(k, m - k);
  long double tail = 0;
  for (int i = 0; i <= lo; ++i) tail += choose(m, i);
  tail /= std::pow(2.0L, m);
  return static_cast<double>(std::min(1.0L, 2 * tail));
}

// Unique matching of configurations by comparing every pair of experiments.
template <class Config, class Eq>
std::vector<std::pair<std::size_t, std::size_t>> brute_pairs(const std::vector<Config>& a,
                                                             const std::vector<Config>& b, Eq same_except) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (same_except(a[i], b[j])) out.emplace_back(i, j);
  return out;
}

}  // namespace oracle
