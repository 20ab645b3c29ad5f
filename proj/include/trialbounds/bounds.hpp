#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trialbounds/dataset.hpp"
#include "trialbounds/policy_sets.hpp"

namespace trialbounds {

// Tight mode conditions on the next-worst/next-best tie sets; relaxed mode
// pools every agreeing worse/better performer. Relaxed bounds are valid but
// never tighter.
enum class SetMode { kTight, kRelaxed };

enum class CellSource { kConditionalMean, kYMin, kYMax };

// Which term of the bound-gap decomposition a covariate value feeds.
enum class GapComponent {
  kNone,         // neutral action with agreeing arms: zero gap
  kNoAgreement,  // no usable agreeing arm: full outcome range
  kBracketed,    // agreeing arms both below and above: mean difference
  kOnlyBelow,    // only worse performers agree: y_max minus their mean
  kOnlyAbove,    // only better performers agree: their mean minus y_min
};

const char* to_string(CellSource source);
const char* to_string(GapComponent component);

// Everything the bound engine needs about one dataset: the registry, the
// covariate weights and a per-(x, policy) table of conditional outcome means
// with pooling weights. Built either from trial records (empirical means,
// sample-count weights) or from analytic population quantities (exact means,
// arm-probability weights).
struct BoundInputs {
  struct Cell {
    double mean = 0.0;
    double weight = 0.0;
  };

  std::vector<PolicySpec> policies;
  std::size_t support_size = 0;
  std::optional<int> neutral_action;
  double y_min = 0.0;
  double y_max = 1.0;
  std::vector<double> pmf;                 // per covariate index
  std::vector<std::optional<Cell>> cells;  // x * policies.size() + p

  const std::optional<Cell>& cell(int x, int p) const {
    return cells[static_cast<std::size_t>(x) * policies.size() +
                 static_cast<std::size_t>(p)];
  }
};

// Empirical inputs: covariate_pmf weights, per-cell sample means, sample
// counts as pooling weights. Throws EmptyDatasetError on a dataset with no
// records.
BoundInputs make_bound_inputs(const TrialDataset& dataset);

// Both conditional bounds at one covariate value, with full provenance.
struct CellBounds {
  int x = -1;
  double lower = 0.0;
  double upper = 0.0;
  CellSource lower_source = CellSource::kYMin;
  CellSource upper_source = CellSource::kYMax;
  std::vector<int> lower_policies;  // set whose pooled mean was used
  std::vector<int> upper_policies;
  // Design says the cell is covered but no sampled record landed in it, so
  // the bound fell back to the conservative constant.
  bool lower_fallback = false;
  bool upper_fallback = false;
  GapComponent component = GapComponent::kNone;
  double delta = 0.0;
};

CellBounds evaluate_cell(const BoundInputs& inputs,
                         const EvaluationPolicy& pi_e, int x, SetMode mode,
                         double perf_eps = 0.0);
double conditional_lower(const BoundInputs& inputs,
                         const EvaluationPolicy& pi_e, int x, SetMode mode,
                         double perf_eps = 0.0);
double conditional_upper(const BoundInputs& inputs,
                         const EvaluationPolicy& pi_e, int x, SetMode mode,
                         double perf_eps = 0.0);

struct BoundsResult {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<CellBounds> cells;
};

// Plug-in bounds: pmf-weighted sum of the conditional bounds over the
// covariate support, in ascending covariate order.
BoundsResult exact_bounds(const BoundInputs& inputs,
                          const EvaluationPolicy& pi_e, SetMode mode,
                          double perf_eps = 0.0);
BoundsResult exact_bounds(const TrialDataset& dataset,
                          const EvaluationPolicy& pi_e, SetMode mode,
                          double perf_eps = 0.0);

struct DecompositionReport {
  std::vector<CellBounds> cells;
  double total_gap = 0.0;  // pmf-weighted sum of per-cell deltas
};

// Assigns each covariate value's share of U - L to its gap component. The
// per-cell deltas are recomputed from the component formulas, so comparing
// total_gap to exact_bounds' U - L is a genuine consistency check.
DecompositionReport decompose_gap(const BoundInputs& inputs,
                                  const EvaluationPolicy& pi_e, SetMode mode,
                                  double perf_eps = 0.0);
DecompositionReport decompose_gap(const TrialDataset& dataset,
                                  const EvaluationPolicy& pi_e, SetMode mode,
                                  double perf_eps = 0.0);

}  // namespace trialbounds
