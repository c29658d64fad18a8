#pragma once

#include <span>

namespace gainlab {

double normal_cdf(double z);

// Gaussian-kernel tail mass above threshold with the Silverman rule
// h = 1.06 * s * n^(-1/5). Falls back to the empirical exceedance
// fraction when fewer than 2 samples or zero variance.
double kde_tail_probability(std::span<const double> samples, double threshold);

// Linear-interpolation quantile (inclusive), q in (0, 100).
double percentile(std::span<const double> samples, double q);

struct ProportionTest {
  double z = 0.0;
  double p = 1.0;
};

// Pooled two-sided z-test for two binomial proportions.
ProportionTest two_proportion_details(long k1, long n1, long k2, long n2);
double two_proportion_test(long k1, long n1, long k2, long n2);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
TTest welch_t_details(std::span<const double> a, std::span<const double> b);
double welch_t_test(std::span<const double> a, std::span<const double> b);

// One-sided p-value for mean(a) > mean(b), derived from the same statistic.
double welch_one_sided_greater(std::span<const double> a,
                               std::span<const double> b);

}  // namespace gainlab
