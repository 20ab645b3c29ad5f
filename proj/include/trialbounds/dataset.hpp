#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace trialbounds {

// One trialed arm: a total deterministic action map over the covariate
// support, its performance (absent only for all-neutral control arms) and
// the design probability of being assigned to this arm.
struct PolicySpec {
  std::string id;
  std::vector<int> action_by_x;  // action index per covariate index, total
  std::optional<double> performance;
  double arm_prob = 0.0;
};

struct TrialRecord {
  std::string unit_id;
  std::string cluster;
  int policy = -1;  // index into the registry
  int x = -1;       // index into the covariate support
  int action = -1;  // index into the action space
  double outcome = 0.0;
};

// Immutable, eagerly validated collection of trial records plus the policy
// registry and outcome range. Safe to share read-only across threads.
class TrialDataset {
 public:
  // Validates every invariant (registry consistency, action agreement,
  // outcome range) and throws the matching error type on the first
  // violation. Codes in `policies`/`records` are already index-resolved.
  static TrialDataset create(std::vector<std::string> covariate_support,
                             std::vector<std::string> action_space,
                             std::optional<int> neutral_action, double y_min,
                             double y_max, std::vector<PolicySpec> policies,
                             std::vector<TrialRecord> records);

  const std::vector<std::string>& covariate_support() const {
    return covariate_support_;
  }
  const std::vector<std::string>& action_space() const { return action_space_; }
  std::optional<int> neutral_action() const { return neutral_action_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  const std::vector<PolicySpec>& policies() const { return policies_; }
  const std::vector<TrialRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  int covariate_index(const std::string& code) const;  // -1 when unknown
  int action_index(const std::string& code) const;
  int policy_index(const std::string& id) const;

  // Per-(x, policy) aggregates, precomputed at construction.
  std::size_t cell_count(int x, int policy) const {
    return cell_counts_[cell(x, policy)];
  }
  double cell_sum(int x, int policy) const { return cell_sums_[cell(x, policy)]; }
  std::size_t arm_count(int policy) const { return arm_counts_[policy]; }
  double arm_sum(int policy) const { return arm_sums_[policy]; }

 private:
  TrialDataset() = default;
  std::size_t cell(int x, int policy) const {
    return static_cast<std::size_t>(x) * policies_.size() +
           static_cast<std::size_t>(policy);
  }

  std::vector<std::string> covariate_support_;
  std::vector<std::string> action_space_;
  std::optional<int> neutral_action_;
  double y_min_ = 0.0;
  double y_max_ = 1.0;
  std::vector<PolicySpec> policies_;
  std::vector<TrialRecord> records_;
  std::unordered_map<std::string, int> covariate_by_code_;
  std::unordered_map<std::string, int> action_by_code_;
  std::unordered_map<std::string, int> policy_by_id_;
  std::vector<std::size_t> cell_counts_;
  std::vector<double> cell_sums_;
  std::vector<std::size_t> arm_counts_;
  std::vector<double> arm_sums_;
};

// Sum of design arm probabilities over a set of policies (0 for the empty
// set). Known by design, not estimated from data.
double arm_probability(const TrialDataset& dataset,
                       std::span<const int> policy_indices);
double arm_probability(const TrialDataset& dataset,
                       std::span<const std::string> policy_ids);

// Mean outcome over records with covariate x whose arm lies in the set;
// nullopt when no record matches.
std::optional<double> empirical_conditional_mean(
    const TrialDataset& dataset, int x, std::span<const int> policy_indices);

// Empirical covariate frequencies over the declared support (zero-count
// values included with mass 0). Sums to 1 within 1e-12.
std::vector<double> covariate_pmf(const TrialDataset& dataset);

}  // namespace trialbounds
