#include "gainlab/analysis/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace gainlab {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

struct SampleStats {
  double mean = 0.0;
  double var = 0.0;  // sample variance (n - 1)
  std::size_t n = 0;
};

SampleStats sample_stats(std::span<const double> xs) {
  SampleStats s;
  s.n = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) {
      const double d = x - s.mean;
      ss += d * d;
    }
    s.var = ss / static_cast<double>(s.n - 1);
  }
  return s;
}

}  // namespace

double kde_tail_probability(std::span<const double> samples, double threshold) {
  if (samples.empty()) throw std::invalid_argument("kde: no samples");
  const SampleStats s = sample_stats(samples);
  const double sd = std::sqrt(s.var);
  if (samples.size() < 2 || sd == 0.0) {
    std::size_t k = 0;
    for (double x : samples)
      if (x > threshold) ++k;
    return static_cast<double>(k) / static_cast<double>(samples.size());
  }
  const double h =
      1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
  double acc = 0.0;
  for (double x : samples) acc += normal_cdf((x - threshold) / h);
  return acc / static_cast<double>(samples.size());
}

double percentile(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile: no samples");
  if (!(q > 0.0 && q < 100.0))
    throw std::invalid_argument("percentile: q must lie in (0, 100)");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double rank = q / 100.0 * static_cast<double>(xs.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

ProportionTest two_proportion_details(long k1, long n1, long k2, long n2) {
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("two_proportion: group sizes must be >= 1");
  if (k1 < 0 || k1 > n1 || k2 < 0 || k2 > n2)
    throw std::invalid_argument("two_proportion: counts out of range");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled =
      static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  ProportionTest out;
  if (pooled <= 0.0 || pooled >= 1.0) return out;  // no evidence either way
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) +
                               1.0 / static_cast<double>(n2)));
  out.z = (p1 - p2) / se;
  out.p = 2.0 * (1.0 - normal_cdf(std::abs(out.z)));
  return out;
}

double two_proportion_test(long k1, long n1, long k2, long n2) {
  return two_proportion_details(k1, n1, k2, n2).p;
}

TTest welch_t_details(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch: each group needs >= 2 samples");
  const SampleStats sa = sample_stats(a);
  const SampleStats sb = sample_stats(b);
  const double va = sa.var / static_cast<double>(sa.n);
  const double vb = sb.var / static_cast<double>(sb.n);
  TTest out;
  if (va + vb == 0.0) {
    // degenerate: no variance anywhere
    out.t = sa.mean == sb.mean ? 0.0
                               : std::copysign(HUGE_VAL, sa.mean - sb.mean);
    out.df = static_cast<double>(sa.n + sb.n - 2);
    out.p = sa.mean == sb.mean ? 1.0 : 0.0;
    return out;
  }
  out.t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  out.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(sa.n - 1) +
            vb * vb / static_cast<double>(sb.n - 1));
  const boost::math::students_t dist(out.df);
  out.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  return out;
}

double welch_t_test(std::span<const double> a, std::span<const double> b) {
  return welch_t_details(a, b).p;
}

double welch_one_sided_greater(std::span<const double> a,
                               std::span<const double> b) {
  const TTest r = welch_t_details(a, b);
  if (std::isinf(r.t)) return r.t > 0 ? 0.0 : 1.0;
  if (r.t == 0.0) return 0.5;
  return r.t > 0 ? r.p / 2.0 : 1.0 - r.p / 2.0;
}

}  // namespace gainlab
