#include "trialbounds/estimator.hpp"

#include <cmath>
#include <cstdint>

#include "trialbounds/errors.hpp"
#include "trialbounds/stats.hpp"

namespace trialbounds {

namespace {

// Per-covariate psi tables: psi = coef[x][arm] * y + constant[x]. Covered
// branches weight the outcome by 1/P(set) for in-set arms (coef) and
// contribute 0 otherwise; uncovered branches contribute the constant.
struct PsiTable {
  std::vector<double> coef;      // x * n_policies + p
  std::vector<double> constant;  // per x
};

PsiTable build_table(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                     SetMode mode, double perf_eps, bool upper) {
  const std::size_t n_policies = dataset.policies().size();
  const std::size_t support = dataset.covariate_support().size();
  PsiTable table;
  table.coef.assign(support * n_policies, 0.0);
  table.constant.assign(support, 0.0);

  for (std::size_t x = 0; x < support; ++x) {
    const PolicySetsAtX sets =
        sets_at(dataset.policies(), pi_e, static_cast<int>(x),
                dataset.neutral_action(), perf_eps);
    const int target = pi_e.action_by_x[x];
    const bool neutral =
        dataset.neutral_action() && target == *dataset.neutral_action();

    const std::vector<int>* set = nullptr;
    if (neutral) {
      set = &sets.agree;
    } else if (upper) {
      set = mode == SetMode::kTight ? &sets.tilde_geq : &sets.geq;
    } else {
      set = mode == SetMode::kTight ? &sets.tilde_leq : &sets.leq;
    }

    if (set->empty()) {
      table.constant[x] = upper ? dataset.y_max() : dataset.y_min();
      continue;
    }
    const double prob = arm_probability(dataset, *set);
    for (int p : *set) {
      table.coef[x * n_policies + static_cast<std::size_t>(p)] = 1.0 / prob;
    }
  }
  return table;
}

double psi_one(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
               const TrialRecord& record, SetMode mode, double perf_eps,
               bool upper) {
  const PolicySetsAtX sets = sets_at(dataset.policies(), pi_e, record.x,
                                     dataset.neutral_action(), perf_eps);
  const int target = pi_e.action_by_x.at(static_cast<std::size_t>(record.x));
  const bool neutral =
      dataset.neutral_action() && target == *dataset.neutral_action();

  const std::vector<int>* set = nullptr;
  if (neutral) {
    set = &sets.agree;
  } else if (upper) {
    set = mode == SetMode::kTight ? &sets.tilde_geq : &sets.geq;
  } else {
    set = mode == SetMode::kTight ? &sets.tilde_leq : &sets.leq;
  }

  if (set->empty()) {
    return upper ? dataset.y_max() : dataset.y_min();
  }
  bool member = false;
  for (int p : *set) {
    if (p == record.policy) {
      member = true;
      break;
    }
  }
  if (!member) return 0.0;
  return record.outcome / arm_probability(dataset, *set);
}

}  // namespace

double psi_lower(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                 const TrialRecord& record, SetMode mode, double perf_eps) {
  return psi_one(dataset, pi_e, record, mode, perf_eps, /*upper=*/false);
}

double psi_upper(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                 const TrialRecord& record, SetMode mode, double perf_eps) {
  return psi_one(dataset, pi_e, record, mode, perf_eps, /*upper=*/true);
}

PsiVectors psi_values(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                      SetMode mode, double perf_eps) {
  const PsiTable lower = build_table(dataset, pi_e, mode, perf_eps, false);
  const PsiTable upper = build_table(dataset, pi_e, mode, perf_eps, true);
  const auto& records = dataset.records();
  const std::size_t n_policies = dataset.policies().size();

  PsiVectors out;
  out.lower.resize(records.size());
  out.upper.resize(records.size());

  const std::int64_t n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const TrialRecord& r = records[static_cast<std::size_t>(i)];
    const std::size_t slot = static_cast<std::size_t>(r.x) * n_policies +
                             static_cast<std::size_t>(r.policy);
    const std::size_t x = static_cast<std::size_t>(r.x);
    out.lower[static_cast<std::size_t>(i)] =
        lower.coef[slot] * r.outcome + lower.constant[x];
    out.upper[static_cast<std::size_t>(i)] =
        upper.coef[slot] * r.outcome + upper.constant[x];
  }
  return out;
}

namespace reference {

PsiVectors psi_values(const TrialDataset& dataset, const EvaluationPolicy& pi_e,
                      SetMode mode, double perf_eps) {
  PsiVectors out;
  out.lower.reserve(dataset.size());
  out.upper.reserve(dataset.size());
  for (const TrialRecord& record : dataset.records()) {
    out.lower.push_back(psi_lower(dataset, pi_e, record, mode, perf_eps));
    out.upper.push_back(psi_upper(dataset, pi_e, record, mode, perf_eps));
  }
  return out;
}

}  // namespace reference

BoundsReport estimate_bounds(const TrialDataset& dataset,
                             const EvaluationPolicy& pi_e, double alpha,
                             SetMode mode, double perf_eps) {
  if (dataset.records().empty()) {
    throw EmptyDatasetError("estimate_bounds: dataset has no records");
  }
  if (dataset.size() < 2) {
    throw DegenerateError(
        "estimate_bounds: need at least 2 records for a standard deviation");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("estimate_bounds: alpha must lie in (0, 1)");
  }

  const PsiVectors psi = psi_values(dataset, pi_e, mode, perf_eps);
  const stats::MeanVar low = stats::mean_variance(psi.lower);
  const stats::MeanVar high = stats::mean_variance(psi.upper);
  const double z = stats::normal_quantile(1.0 - alpha / 2.0);
  const double root_n = std::sqrt(static_cast<double>(dataset.size()));

  BoundsReport report;
  report.policy_id = pi_e.id;
  report.lower = low.mean;
  report.upper = high.mean;
  report.sd_lower = std::sqrt(low.var);
  report.sd_upper = std::sqrt(high.var);
  report.n = dataset.size();
  report.alpha = alpha;
  report.ci_low = low.mean - z * report.sd_lower / root_n;
  report.ci_high = high.mean + z * report.sd_upper / root_n;
  return report;
}

ArmValue trialed_arm_value(const TrialDataset& dataset,
                           const std::string& policy_id, double alpha) {
  const int p = dataset.policy_index(policy_id);
  if (p < 0) {
    throw RegistryError("trialed_arm_value: unknown policy id '" + policy_id +
                        "'");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("trialed_arm_value: alpha must lie in (0, 1)");
  }
  std::vector<double> outcomes;
  for (const TrialRecord& r : dataset.records()) {
    if (r.policy == p) outcomes.push_back(r.outcome);
  }
  if (outcomes.size() < 2) {
    throw DegenerateError("trialed_arm_value: arm '" + policy_id +
                          "' has fewer than 2 records");
  }
  const stats::MeanVar mv = stats::mean_variance(outcomes);
  const double z = stats::normal_quantile(1.0 - alpha / 2.0);
  const double margin =
      z * std::sqrt(mv.var) / std::sqrt(static_cast<double>(mv.n));

  ArmValue value;
  value.policy_id = policy_id;
  value.mean = mv.mean;
  value.ci_low = mv.mean - margin;
  value.ci_high = mv.mean + margin;
  value.n = mv.n;
  return value;
}

}  // namespace trialbounds
