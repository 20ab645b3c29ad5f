#include "trialbounds/dataset.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "trialbounds/errors.hpp"

namespace trialbounds {

namespace {

constexpr double kArmProbTolerance = 1e-9;

}  // namespace

TrialDataset TrialDataset::create(std::vector<std::string> covariate_support,
                                  std::vector<std::string> action_space,
                                  std::optional<int> neutral_action,
                                  double y_min, double y_max,
                                  std::vector<PolicySpec> policies,
                                  std::vector<TrialRecord> records) {
  TrialDataset ds;
  if (covariate_support.empty()) {
    throw SchemaError("covariate support must be non-empty");
  }
  if (action_space.empty()) {
    throw SchemaError("action space must be non-empty");
  }
  if (!(y_min < y_max)) {
    throw SchemaError("y_min must be strictly less than y_max");
  }
  if (neutral_action &&
      (*neutral_action < 0 ||
       *neutral_action >= static_cast<int>(action_space.size()))) {
    throw SchemaError("neutral action is not a member of the action space");
  }

  ds.covariate_support_ = std::move(covariate_support);
  ds.action_space_ = std::move(action_space);
  ds.neutral_action_ = neutral_action;
  ds.y_min_ = y_min;
  ds.y_max_ = y_max;
  ds.policies_ = std::move(policies);
  ds.records_ = std::move(records);

  for (std::size_t i = 0; i < ds.covariate_support_.size(); ++i) {
    if (!ds.covariate_by_code_.emplace(ds.covariate_support_[i], i).second) {
      throw SchemaError("duplicate covariate code: " + ds.covariate_support_[i]);
    }
  }
  for (std::size_t i = 0; i < ds.action_space_.size(); ++i) {
    if (!ds.action_by_code_.emplace(ds.action_space_[i], i).second) {
      throw SchemaError("duplicate action code: " + ds.action_space_[i]);
    }
  }

  if (ds.policies_.empty()) {
    throw RegistryError("registry must contain at least one policy");
  }
  double prob_sum = 0.0;
  for (std::size_t p = 0; p < ds.policies_.size(); ++p) {
    const PolicySpec& spec = ds.policies_[p];
    if (!ds.policy_by_id_.emplace(spec.id, p).second) {
      throw RegistryError("duplicate policy id: " + spec.id);
    }
    if (spec.action_by_x.size() != ds.covariate_support_.size()) {
      throw RegistryError("policy " + spec.id +
                          ": action_map does not cover the covariate support");
    }
    bool all_neutral = true;
    for (int a : spec.action_by_x) {
      if (a < 0 || a >= static_cast<int>(ds.action_space_.size())) {
        throw RegistryError("policy " + spec.id +
                            ": action_map value outside the action space");
      }
      if (!ds.neutral_action_ || a != *ds.neutral_action_) all_neutral = false;
    }
    if (!spec.performance) {
      if (!all_neutral) {
        throw RegistryError(
            "policy " + spec.id +
            ": performance may be absent only for all-neutral policies");
      }
    } else if (!std::isfinite(*spec.performance)) {
      throw RegistryError("policy " + spec.id + ": performance must be finite");
    }
    if (!(spec.arm_prob > 0.0) || spec.arm_prob > 1.0) {
      throw RegistryError("policy " + spec.id +
                          ": arm_prob must lie in (0, 1]");
    }
    prob_sum += spec.arm_prob;
  }
  if (std::fabs(prob_sum - 1.0) > kArmProbTolerance) {
    throw RegistryError("arm probabilities sum to " + std::to_string(prob_sum) +
                        ", expected 1");
  }

  ds.cell_counts_.assign(ds.covariate_support_.size() * ds.policies_.size(), 0);
  ds.cell_sums_.assign(ds.cell_counts_.size(), 0.0);
  ds.arm_counts_.assign(ds.policies_.size(), 0);
  ds.arm_sums_.assign(ds.policies_.size(), 0.0);

  for (std::size_t i = 0; i < ds.records_.size(); ++i) {
    const TrialRecord& r = ds.records_[i];
    auto row = [i] { return "record " + std::to_string(i); };
    if (r.policy < 0 || r.policy >= static_cast<int>(ds.policies_.size())) {
      throw RegistryError(row() + ": unknown policy");
    }
    if (r.x < 0 || r.x >= static_cast<int>(ds.covariate_support_.size())) {
      throw ConsistencyError(row() +
                             ": covariate outside the declared support");
    }
    if (r.action < 0 || r.action >= static_cast<int>(ds.action_space_.size())) {
      throw ConsistencyError(row() + ": action outside the declared space");
    }
    const PolicySpec& spec = ds.policies_[r.policy];
    if (spec.action_by_x[r.x] != r.action) {
      throw ConsistencyError(
          row() + ": action '" + ds.action_space_[r.action] +
          "' differs from policy " + spec.id + "(" +
          ds.covariate_support_[r.x] + ") = '" +
          ds.action_space_[spec.action_by_x[r.x]] + "'");
    }
    if (!(r.outcome >= ds.y_min_) || !(r.outcome <= ds.y_max_)) {
      throw RangeError(row() + ": outcome " + std::to_string(r.outcome) +
                       " outside [" + std::to_string(ds.y_min_) + ", " +
                       std::to_string(ds.y_max_) + "]");
    }
    ds.cell_counts_[ds.cell(r.x, r.policy)] += 1;
    ds.cell_sums_[ds.cell(r.x, r.policy)] += r.outcome;
    ds.arm_counts_[r.policy] += 1;
    ds.arm_sums_[r.policy] += r.outcome;
  }
  return ds;
}

int TrialDataset::covariate_index(const std::string& code) const {
  auto it = covariate_by_code_.find(code);
  return it == covariate_by_code_.end() ? -1 : it->second;
}

int TrialDataset::action_index(const std::string& code) const {
  auto it = action_by_code_.find(code);
  return it == action_by_code_.end() ? -1 : it->second;
}

int TrialDataset::policy_index(const std::string& id) const {
  auto it = policy_by_id_.find(id);
  return it == policy_by_id_.end() ? -1 : it->second;
}

double arm_probability(const TrialDataset& dataset,
                       std::span<const int> policy_indices) {
  double total = 0.0;
  for (int p : policy_indices) {
    if (p < 0 || p >= static_cast<int>(dataset.policies().size())) {
      throw RegistryError("arm_probability: unknown policy index");
    }
    total += dataset.policies()[p].arm_prob;
  }
  return total;
}

double arm_probability(const TrialDataset& dataset,
                       std::span<const std::string> policy_ids) {
  double total = 0.0;
  for (const std::string& id : policy_ids) {
    const int p = dataset.policy_index(id);
    if (p < 0) {
      throw RegistryError("arm_probability: unknown policy id '" + id + "'");
    }
    total += dataset.policies()[p].arm_prob;
  }
  return total;
}

std::optional<double> empirical_conditional_mean(
    const TrialDataset& dataset, int x, std::span<const int> policy_indices) {
  std::size_t count = 0;
  double sum = 0.0;
  for (int p : policy_indices) {
    count += dataset.cell_count(x, p);
    sum += dataset.cell_sum(x, p);
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::vector<double> covariate_pmf(const TrialDataset& dataset) {
  if (dataset.records().empty()) {
    throw EmptyDatasetError("covariate_pmf: dataset has no records");
  }
  std::vector<std::size_t> counts(dataset.covariate_support().size(), 0);
  for (const TrialRecord& r : dataset.records()) {
    counts[static_cast<std::size_t>(r.x)] += 1;
  }
  std::vector<double> pmf(counts.size());
  const double n = static_cast<double>(dataset.records().size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    pmf[i] = static_cast<double>(counts[i]) / n;
  }
  return pmf;
}

}  // namespace trialbounds
