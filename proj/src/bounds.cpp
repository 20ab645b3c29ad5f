#include "trialbounds/bounds.hpp"

#include "trialbounds/errors.hpp"

namespace trialbounds {

namespace {

// Weighted pool of per-arm conditional means over a policy set: sample-size
// weighted for empirical inputs, arm-probability weighted for population
// inputs. nullopt when no member of the set has data at x.
std::optional<double> pooled_mean(const BoundInputs& inputs, int x,
                                  const std::vector<int>& set) {
  double sum = 0.0;
  double weight = 0.0;
  for (int p : set) {
    const auto& cell = inputs.cell(x, p);
    if (!cell) continue;
    sum += cell->mean * cell->weight;
    weight += cell->weight;
  }
  if (weight <= 0.0) return std::nullopt;
  return sum / weight;
}

}  // namespace

const char* to_string(CellSource source) {
  switch (source) {
    case CellSource::kConditionalMean:
      return "conditional_mean";
    case CellSource::kYMin:
      return "y_min";
    case CellSource::kYMax:
      return "y_max";
  }
  return "unknown";
}

const char* to_string(GapComponent component) {
  switch (component) {
    case GapComponent::kNone:
      return "none";
    case GapComponent::kNoAgreement:
      return "no_agreement";
    case GapComponent::kBracketed:
      return "bracketed";
    case GapComponent::kOnlyBelow:
      return "only_below";
    case GapComponent::kOnlyAbove:
      return "only_above";
  }
  return "unknown";
}

BoundInputs make_bound_inputs(const TrialDataset& dataset) {
  BoundInputs inputs;
  inputs.policies = dataset.policies();
  inputs.support_size = dataset.covariate_support().size();
  inputs.neutral_action = dataset.neutral_action();
  inputs.y_min = dataset.y_min();
  inputs.y_max = dataset.y_max();
  inputs.pmf = covariate_pmf(dataset);
  inputs.cells.resize(inputs.support_size * inputs.policies.size());
  for (std::size_t x = 0; x < inputs.support_size; ++x) {
    for (std::size_t p = 0; p < inputs.policies.size(); ++p) {
      const std::size_t count =
          dataset.cell_count(static_cast<int>(x), static_cast<int>(p));
      if (count == 0) continue;
      BoundInputs::Cell cell;
      cell.weight = static_cast<double>(count);
      cell.mean = dataset.cell_sum(static_cast<int>(x), static_cast<int>(p)) /
                  cell.weight;
      inputs.cells[x * inputs.policies.size() + p] = cell;
    }
  }
  return inputs;
}

CellBounds evaluate_cell(const BoundInputs& inputs,
                         const EvaluationPolicy& pi_e, int x, SetMode mode,
                         double perf_eps) {
  const PolicySetsAtX sets =
      sets_at(inputs.policies, pi_e, x, inputs.neutral_action, perf_eps);
  const int target = pi_e.action_by_x.at(static_cast<std::size_t>(x));
  const bool neutral =
      inputs.neutral_action && target == *inputs.neutral_action;

  CellBounds cell;
  cell.x = x;

  if (neutral) {
    const std::optional<double> mean = pooled_mean(inputs, x, sets.agree);
    if (mean) {
      cell.lower = cell.upper = *mean;
      cell.lower_source = cell.upper_source = CellSource::kConditionalMean;
      cell.lower_policies = cell.upper_policies = sets.agree;
      cell.component = GapComponent::kNone;
      cell.delta = 0.0;
      return cell;
    }
    cell.lower = inputs.y_min;
    cell.upper = inputs.y_max;
    cell.lower_source = CellSource::kYMin;
    cell.upper_source = CellSource::kYMax;
    cell.lower_fallback = cell.upper_fallback = !sets.agree.empty();
    cell.component = GapComponent::kNoAgreement;
    cell.delta = inputs.y_max - inputs.y_min;
    return cell;
  }

  const std::vector<int>& low_set =
      mode == SetMode::kTight ? sets.tilde_leq : sets.leq;
  const std::vector<int>& high_set =
      mode == SetMode::kTight ? sets.tilde_geq : sets.geq;
  const std::optional<double> mu_low = pooled_mean(inputs, x, low_set);
  const std::optional<double> mu_high = pooled_mean(inputs, x, high_set);

  if (mu_low) {
    cell.lower = *mu_low;
    cell.lower_source = CellSource::kConditionalMean;
    cell.lower_policies = low_set;
  } else {
    cell.lower = inputs.y_min;
    cell.lower_source = CellSource::kYMin;
    cell.lower_fallback = !low_set.empty();
  }
  if (mu_high) {
    cell.upper = *mu_high;
    cell.upper_source = CellSource::kConditionalMean;
    cell.upper_policies = high_set;
  } else {
    cell.upper = inputs.y_max;
    cell.upper_source = CellSource::kYMax;
    cell.upper_fallback = !high_set.empty();
  }

  if (mu_low && mu_high) {
    cell.component = GapComponent::kBracketed;
    cell.delta = *mu_high - *mu_low;
  } else if (mu_low) {
    cell.component = GapComponent::kOnlyBelow;
    cell.delta = inputs.y_max - *mu_low;
  } else if (mu_high) {
    cell.component = GapComponent::kOnlyAbove;
    cell.delta = *mu_high - inputs.y_min;
  } else {
    cell.component = GapComponent::kNoAgreement;
    cell.delta = inputs.y_max - inputs.y_min;
  }
  return cell;
}

double conditional_lower(const BoundInputs& inputs,
                         const EvaluationPolicy& pi_e, int x, SetMode mode,
                         double perf_eps) {
  return evaluate_cell(inputs, pi_e, x, mode, perf_eps).lower;
}

double conditional_upper(const BoundInputs& inputs,
                         const EvaluationPolicy& pi_e, int x, SetMode mode,
                         double perf_eps) {
  return evaluate_cell(inputs, pi_e, x, mode, perf_eps).upper;
}

BoundsResult exact_bounds(const BoundInputs& inputs,
                          const EvaluationPolicy& pi_e, SetMode mode,
                          double perf_eps) {
  if (inputs.support_size == 0 || inputs.pmf.empty()) {
    throw EmptyDatasetError("exact_bounds: no covariate weights");
  }
  BoundsResult result;
  // Fixed ascending summation order keeps results deterministic.
  for (std::size_t x = 0; x < inputs.support_size; ++x) {
    CellBounds cell =
        evaluate_cell(inputs, pi_e, static_cast<int>(x), mode, perf_eps);
    result.lower += inputs.pmf[x] * cell.lower;
    result.upper += inputs.pmf[x] * cell.upper;
    result.cells.push_back(std::move(cell));
  }
  return result;
}

BoundsResult exact_bounds(const TrialDataset& dataset,
                          const EvaluationPolicy& pi_e, SetMode mode,
                          double perf_eps) {
  return exact_bounds(make_bound_inputs(dataset), pi_e, mode, perf_eps);
}

DecompositionReport decompose_gap(const BoundInputs& inputs,
                                  const EvaluationPolicy& pi_e, SetMode mode,
                                  double perf_eps) {
  if (inputs.support_size == 0 || inputs.pmf.empty()) {
    throw EmptyDatasetError("decompose_gap: no covariate weights");
  }
  DecompositionReport report;
  for (std::size_t x = 0; x < inputs.support_size; ++x) {
    CellBounds cell =
        evaluate_cell(inputs, pi_e, static_cast<int>(x), mode, perf_eps);
    report.total_gap += inputs.pmf[x] * cell.delta;
    report.cells.push_back(std::move(cell));
  }
  return report;
}

DecompositionReport decompose_gap(const TrialDataset& dataset,
                                  const EvaluationPolicy& pi_e, SetMode mode,
                                  double perf_eps) {
  return decompose_gap(make_bound_inputs(dataset), pi_e, mode, perf_eps);
}

}  // namespace trialbounds
