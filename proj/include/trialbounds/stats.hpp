#pragma once

#include <cstddef>
#include <span>

namespace trialbounds::stats {

// Standard normal CDF, accurate to machine precision via erfc.
double normal_cdf(double x);

// Inverse standard normal CDF on (0, 1). Rational initial estimate refined
// with one Halley step against normal_cdf; absolute error well below 1e-9.
// Throws DomainError outside the open interval.
double normal_quantile(double p);

// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

// CDF of Student's t distribution with df > 0 degrees of freedom.
double student_t_cdf(double t, double df);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased, n-1 denominator
  std::size_t n = 0;
};

// Mean for n >= 1, variance for n >= 2 (throws DegenerateError below that).
MeanVar mean_variance(std::span<const double> xs);

struct WelchResult {
  double statistic = 0.0;  // t for mean(a) - mean(b)
  double df = 0.0;         // Welch-Satterthwaite
  double p_less = 0.0;     // P(T <= t): small when mean(a) << mean(b)
  double p_two_sided = 0.0;
};

// Welch's unequal-variance two-sample t test from summary statistics.
// Degenerate zero-variance inputs produce a +/-infinite statistic (or 0 when
// the means coincide) with the corresponding limit p-values.
WelchResult welch_t(const MeanVar& a, const MeanVar& b);

}  // namespace trialbounds::stats
