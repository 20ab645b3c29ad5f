#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle_support.hpp"
#include "trialbounds/errors.hpp"
#include "trialbounds/stats.hpp"

using namespace trialbounds;

TEST_CASE("normal quantile matches reference values") {
  CHECK(stats::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  // Standard normal table value for the 97.5% point.
  CHECK(std::fabs(stats::normal_quantile(0.975) - 1.959963984540054) < 1e-9);
  CHECK(std::fabs(stats::normal_quantile(0.95) - 1.6448536269514722) < 1e-9);
  // Phi(1) = 0.8413447...; p = 0.84134 sits a hair below 1.
  CHECK(std::fabs(stats::normal_quantile(0.84134) - 1.0) < 1e-4);
}

TEST_CASE("normal quantile round-trips through the CDF") {
  for (double p = 0.001; p < 0.9995; p += 0.0177) {
    CHECK(std::fabs(stats::normal_cdf(stats::normal_quantile(p)) - p) < 1e-12);
  }
  for (double p : {1e-12, 1e-9, 1e-6, 1.0 - 1e-9}) {
    const double q = stats::normal_quantile(p);
    CHECK(std::fabs(stats::normal_cdf(q) - p) <= 1e-9 * std::max(p, 1.0 - p));
  }
  // symmetry
  for (double p : {0.01, 0.1, 0.3, 0.45}) {
    CHECK(std::fabs(stats::normal_quantile(p) +
                    stats::normal_quantile(1.0 - p)) < 1e-12);
  }
}

TEST_CASE("normal quantile rejects out-of-domain probabilities") {
  CHECK_THROWS_AS(stats::normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(stats::normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(stats::normal_quantile(-0.25), DomainError);
  CHECK_THROWS_AS(stats::normal_quantile(1.5), DomainError);
  CHECK_THROWS_AS(stats::normal_quantile(std::nan("")), DomainError);
}

TEST_CASE("incomplete beta closed forms") {
  for (double x : {0.0, 0.1, 0.37, 0.5, 0.82, 1.0}) {
    CHECK(std::fabs(stats::regularized_incomplete_beta(1.0, 1.0, x) - x) <
          1e-13);
    CHECK(std::fabs(stats::regularized_incomplete_beta(2.0, 1.0, x) - x * x) <
          1e-13);
    CHECK(std::fabs(stats::regularized_incomplete_beta(1.0, 2.0, x) -
                    (2.0 * x - x * x)) < 1e-13);
  }
  // symmetry identity
  for (double x : {0.2, 0.6, 0.9}) {
    CHECK(std::fabs(stats::regularized_incomplete_beta(3.5, 1.25, x) +
                    stats::regularized_incomplete_beta(1.25, 3.5, 1.0 - x) -
                    1.0) < 1e-12);
  }
}

TEST_CASE("student t CDF agrees with the quadrature oracle") {
  for (double df : {1.0, 2.0, 5.0, 10.0, 37.5, 120.0}) {
    for (double t : {-3.5, -1.0, -0.2, 0.0, 0.4, 1.3, 2.8}) {
      const double expected = testsupport::t_cdf_quadrature(t, df);
      CHECK(std::fabs(stats::student_t_cdf(t, df) - expected) < 1e-9);
    }
  }
}

TEST_CASE("student t CDF hits standard table quantiles") {
  CHECK(std::fabs(stats::student_t_cdf(12.706204736, 1.0) - 0.975) < 1e-6);
  CHECK(std::fabs(stats::student_t_cdf(2.0150483727, 5.0) - 0.95) < 1e-6);
  CHECK(std::fabs(stats::student_t_cdf(2.2281388520, 10.0) - 0.975) < 1e-6);
  CHECK(stats::student_t_cdf(0.0, 7.0) == doctest::Approx(0.5));
}

TEST_CASE("mean_variance basics") {
  const std::vector<double> xs{0.0, 1.0, 1.0, 0.0};
  const stats::MeanVar mv = stats::mean_variance(xs);
  CHECK(mv.mean == doctest::Approx(0.5));
  CHECK(mv.var == doctest::Approx(1.0 / 3.0));
  CHECK(mv.n == 4);

  const std::vector<double> one{0.7};
  CHECK_THROWS_AS(stats::mean_variance(one), DegenerateError);
  CHECK_THROWS_AS(stats::mean_variance(std::vector<double>{}),
                  DegenerateError);
}

TEST_CASE("welch test against the quadrature oracle") {
  stats::MeanVar a{1.0, 1.0, 10};
  stats::MeanVar b{0.0, 1.0, 10};
  const stats::WelchResult r = stats::welch_t(a, b);
  CHECK(r.statistic == doctest::Approx(1.0 / std::sqrt(0.2)));
  CHECK(r.df == doctest::Approx(18.0));
  const double oracle_p =
      2.0 * (1.0 - testsupport::t_cdf_quadrature(r.statistic, r.df));
  CHECK(std::fabs(r.p_two_sided - oracle_p) < 1e-9);
  CHECK(std::fabs(r.p_less -
                  testsupport::t_cdf_quadrature(r.statistic, r.df)) < 1e-9);
}

TEST_CASE("welch degenerate inputs") {
  stats::MeanVar equal{0.4, 0.0, 5};
  const stats::WelchResult same = stats::welch_t(equal, equal);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_two_sided == doctest::Approx(1.0));
  CHECK(same.p_less == doctest::Approx(0.5));

  stats::MeanVar lower{0.1, 0.0, 5};
  stats::MeanVar higher{0.9, 0.0, 5};
  const stats::WelchResult apart = stats::welch_t(lower, higher);
  CHECK(std::isinf(apart.statistic));
  CHECK(apart.statistic < 0.0);
  CHECK(apart.p_less == 0.0);
  CHECK(apart.p_two_sided == 0.0);

  stats::MeanVar tiny{0.5, 0.2, 1};
  CHECK_THROWS_AS(stats::welch_t(tiny, equal), DegenerateError);
}
