#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trialbounds/dataset.hpp"

namespace trialbounds {

enum class Assumption { kPerformanceMonotonicity, kNeutralActions };
enum class TestMethod { kWelchT, kPermutation };
enum class TestStatus { kOk, kSkipped };

const char* to_string(Assumption assumption);
const char* to_string(TestMethod method);
const char* to_string(TestStatus status);

// Result of one pairwise falsification test. The pair is ordered so that
// low_policy has the smaller performance (lexical order when a performance
// is undefined, which can only happen for the neutral-action test).
struct TestReport {
  Assumption assumption = Assumption::kPerformanceMonotonicity;
  std::string low_policy_id;
  std::string high_policy_id;
  std::vector<int> region;  // covariate indices
  std::size_t n_low = 0;
  std::size_t n_high = 0;
  double mean_low = 0.0;
  double mean_high = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;  // Holm across the batch; = p_value when standalone
  bool rejected = false;    // raw decision at alpha
  bool rejected_adjusted = false;
  double alpha = 0.05;
  TestMethod method = TestMethod::kWelchT;
  TestStatus status = TestStatus::kOk;
  std::string skip_reason;
};

// Covariate values where the two policies output the same action.
std::vector<int> agreement_region(const PolicySpec& p1, const PolicySpec& p2,
                                  std::size_t support_size);

// Covariate values where both policies output the neutral action.
std::vector<int> neutral_region(const PolicySpec& p1, const PolicySpec& p2,
                                int neutral_action, std::size_t support_size);

struct FalsifyOptions {
  TestMethod method = TestMethod::kWelchT;
  std::uint64_t seed = 0;
  int permutations = 10000;
};

// One-sided test of performance monotonicity on the agreement region: a
// small p-value means the higher-performance arm had significantly worse
// outcomes than the lower-performance arm, falsifying the assumption.
TestReport test_monotonicity(const TrialDataset& dataset,
                             const std::string& id1, const std::string& id2,
                             double alpha, const FalsifyOptions& options = {});

// Two-sided test on the region where both policies take the neutral action:
// any significant outcome difference falsifies the neutral-action
// assumption.
TestReport test_neutral_action(const TrialDataset& dataset,
                               const std::string& id1, const std::string& id2,
                               double alpha,
                               const FalsifyOptions& options = {});

// All applicable tests over every unordered arm pair, with Holm step-down
// adjustment across the p-values actually computed. Pairs whose
// preconditions fail are listed as skipped with the reason.
std::vector<TestReport> run_all_pairs(const TrialDataset& dataset, double alpha,
                                      const FalsifyOptions& options = {});

}  // namespace trialbounds
