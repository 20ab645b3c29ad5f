#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trialbounds/bounds.hpp"
#include "trialbounds/dataset.hpp"
#include "trialbounds/policy_sets.hpp"

namespace trialbounds {

struct BoundsReport {
  std::string policy_id;
  double lower = 0.0;     // L_hat
  double upper = 0.0;     // U_hat
  double sd_lower = 0.0;  // empirical sd of the psi_L draws (n-1 denominator)
  double sd_upper = 0.0;
  std::size_t n = 0;
  double alpha = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Per-record inverse-probability-weighted contributions to the lower/upper
// bound. Arm-set probabilities are the design values from the registry.
double psi_lower(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                 const TrialRecord& record, SetMode mode = SetMode::kTight,
                 double perf_eps = 0.0);
double psi_upper(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                 const TrialRecord& record, SetMode mode = SetMode::kTight,
                 double perf_eps = 0.0);

struct PsiVectors {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Evaluates psi for every record. Branch tables are precomputed per
// covariate value and the fill is OpenMP-parallel; each slot is written
// exactly once, so the result is bit-identical across thread counts.
PsiVectors psi_values(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                      SetMode mode = SetMode::kTight, double perf_eps = 0.0);

namespace reference {
// Serial reference path: evaluates the per-record operations directly.
// Kept for tests and the benchmark.
PsiVectors psi_values(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                      SetMode mode = SetMode::kTight, double perf_eps = 0.0);
}  // namespace reference

// Sample means of psi_L / psi_U with the asymptotic confidence interval
// [L_hat - z_{1-a/2} sd_L / sqrt(n), U_hat + z_{1-a/2} sd_U / sqrt(n)].
BoundsReport estimate_bounds(const TrialDataset& dataset,
                             const EvaluationPolicy& pi_e, double alpha,
                             SetMode mode = SetMode::kTight,
                             double perf_eps = 0.0);

struct ArmValue {
  std::string policy_id;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

// Sample mean outcome of one trialed arm with a normal-approximation CI.
ArmValue trialed_arm_value(const TrialDataset& dataset,
                           const std::string& policy_id, double alpha);

}  // namespace trialbounds
