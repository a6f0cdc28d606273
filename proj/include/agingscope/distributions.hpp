#pragma once

#include <cstdint>

// Tail probabilities used by the tests. Backed by Boost.Math.
namespace agingscope::dist {

double normal_cdf(double z);
/// Upper quantile: z such that P(Z > z) = p.
double normal_upper_quantile(double p);
/// P(|Z| >= |z|).
double normal_two_sided_p(double z);
/// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);
/// P(F >= f) for Fisher's F(df1, df2).
double fisher_f_upper_p(double f, double df1, double df2);
/// P(X >= x) for chi-square with df degrees of freedom.
double chi_squared_upper_p(double x, double df);
/// P(X <= k) for Binomial(n, 1/2), computed exactly for moderate n.
double binomial_half_cdf(std::int64_t k, std::int64_t n);

}  // namespace agingscope::dist
