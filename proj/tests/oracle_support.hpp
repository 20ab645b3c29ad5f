#pragma once

// Shared test-only fixtures and independent oracles. Everything here stays
// deliberately separate from the library implementation paths it checks.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trialbounds/dataset.hpp"
#include "trialbounds/policy_sets.hpp"
#include "trialbounds/rng.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Quadrature oracle for distribution functions.

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double fa, double fb,
                               double fm, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double eps = 1e-13) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

inline double t_density(double u, double df) {
  return std::exp(std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)) /
         std::sqrt(df * M_PI) *
         std::pow(1.0 + u * u / df, -0.5 * (df + 1.0));
}

// Student-t CDF by numeric integration of the density.
inline double t_cdf_quadrature(double t, double df) {
  if (t < 0.0) return 1.0 - t_cdf_quadrature(-t, df);
  return 0.5 + integrate([df](double u) { return t_density(u, df); }, 0.0, t);
}

// ---------------------------------------------------------------------------
// Hand-built registry fixtures (literal performances, uniform thirds).

inline std::vector<trialbounds::PolicySpec> paper_registry() {
  using trialbounds::PolicySpec;
  PolicySpec pi0{"pi0", {0, 0, 0, 0}, std::nullopt, 1.0 / 3.0};
  PolicySpec pi1{"pi1", {0, 1, 0, 0}, 0.425, 1.0 / 3.0};
  PolicySpec pi2{"pi2", {0, 0, 1, 1}, 0.375, 1.0 / 3.0};
  return {pi0, pi1, pi2};
}

inline trialbounds::EvaluationPolicy pi_e0() {
  return {"pi_e0", {0, 1, 1, 1}, 0.475};
}

inline trialbounds::EvaluationPolicy pi_e1() {
  return {"pi_e1", {1, 1, 0, 0}, 0.625};
}

// ---------------------------------------------------------------------------
// Balanced fixture: `per_cell` records for every (x, arm) pair, outcomes
// pseudo-random in [0, 1]. With no neutral action and per-cell balance the
// empirical conditional arm frequencies equal the design probabilities, so
// plug-in and IPW estimates coincide exactly.

struct BalancedSpec {
  std::size_t per_cell = 25;
  bool neutral = false;  // designate action "0" as neutral
  std::uint64_t seed = 2024;
};

inline trialbounds::TrialDataset balanced_dataset(const BalancedSpec& spec) {
  using trialbounds::PolicySpec;
  using trialbounds::TrialRecord;

  std::vector<PolicySpec> policies{
      {"arm_a", {0, 0, 0, 0}, 0.30, 1.0 / 3.0},
      {"arm_b", {0, 1, 0, 0}, 0.45, 1.0 / 3.0},
      {"arm_c", {0, 0, 1, 1}, 0.40, 1.0 / 3.0},
  };

  trialbounds::CounterStream outcomes(spec.seed, 0x62616cULL);
  std::vector<TrialRecord> records;
  std::uint64_t counter = 0;
  for (int x = 0; x < 4; ++x) {
    for (int p = 0; p < 3; ++p) {
      for (std::size_t k = 0; k < spec.per_cell; ++k) {
        TrialRecord rec;
        rec.unit_id = "u" + std::to_string(counter);
        rec.cluster = "c" + std::to_string(p);
        rec.policy = p;
        rec.x = x;
        rec.action = policies[static_cast<std::size_t>(p)]
                         .action_by_x[static_cast<std::size_t>(x)];
        rec.outcome = outcomes.uniform(counter);
        records.push_back(std::move(rec));
        ++counter;
      }
    }
  }
  return trialbounds::TrialDataset::create(
      {"0", "1", "2", "3"}, {"0", "1"},
      spec.neutral ? std::optional<int>(0) : std::nullopt, 0.0, 1.0,
      std::move(policies), std::move(records));
}

// Random total action map + performance, for property tests.
inline trialbounds::EvaluationPolicy random_policy(std::uint64_t seed,
                                                   std::uint64_t index) {
  trialbounds::CounterStream stream(seed, 0x706f6cULL);
  trialbounds::EvaluationPolicy pi_e;
  pi_e.id = "rand" + std::to_string(index);
  for (int x = 0; x < 4; ++x) {
    pi_e.action_by_x.push_back(
        stream.uniform(index * 8 + static_cast<std::uint64_t>(x)) < 0.5 ? 0
                                                                        : 1);
  }
  pi_e.performance =
      0.25 + 0.45 * stream.uniform(index * 8 + 7);  // spans the arm range
  return pi_e;
}

}  // namespace testsupport
