#include "trialbounds/policy_sets.hpp"

#include <algorithm>

#include "trialbounds/errors.hpp"

namespace trialbounds {

const char* to_string(PartitionCell cell) {
  switch (cell) {
    case PartitionCell::kNonneutralCoveredLow:
      return "nonneutral_covered_low";
    case PartitionCell::kNonneutralUncoveredLow:
      return "nonneutral_uncovered_low";
    case PartitionCell::kNonneutralCoveredHigh:
      return "nonneutral_covered_high";
    case PartitionCell::kNonneutralUncoveredHigh:
      return "nonneutral_uncovered_high";
    case PartitionCell::kNeutralCovered:
      return "neutral_covered";
    case PartitionCell::kNeutralUncovered:
      return "neutral_uncovered";
  }
  return "unknown";
}

PolicySetsAtX sets_at(std::span<const PolicySpec> registry,
                      const EvaluationPolicy& pi_e, int x,
                      std::optional<int> neutral_action, double perf_eps) {
  const int target = pi_e.action_by_x.at(static_cast<std::size_t>(x));
  const bool target_neutral = neutral_action && target == *neutral_action;

  PolicySetsAtX out;
  for (int p = 0; p < static_cast<int>(registry.size()); ++p) {
    const PolicySpec& spec = registry[p];
    if (spec.action_by_x.at(static_cast<std::size_t>(x)) != target) continue;
    out.agree.push_back(p);
    if (!spec.performance) {
      if (!target_neutral) {
        throw UndefinedPerformanceError(
            "policy " + spec.id + " matches a non-neutral action at x index " +
            std::to_string(x) + " but has no defined performance");
      }
      continue;  // participates in agree only
    }
    if (*spec.performance <= pi_e.performance + perf_eps) {
      out.leq.push_back(p);
    }
    if (*spec.performance >= pi_e.performance - perf_eps) {
      out.geq.push_back(p);
    }
  }

  if (!out.leq.empty()) {
    double best = *registry[out.leq.front()].performance;
    for (int p : out.leq) best = std::max(best, *registry[p].performance);
    for (int p : out.leq) {
      if (*registry[p].performance >= best - perf_eps) {
        out.tilde_leq.push_back(p);
      }
    }
  }
  if (!out.geq.empty()) {
    double best = *registry[out.geq.front()].performance;
    for (int p : out.geq) best = std::min(best, *registry[p].performance);
    for (int p : out.geq) {
      if (*registry[p].performance <= best + perf_eps) {
        out.tilde_geq.push_back(p);
      }
    }
  }
  return out;
}

std::pair<PartitionCell, PartitionCell> classify(
    const PolicySetsAtX& sets, int pi_e_action,
    std::optional<int> neutral_action) {
  if (neutral_action && pi_e_action == *neutral_action) {
    const PartitionCell cell = sets.agree.empty()
                                   ? PartitionCell::kNeutralUncovered
                                   : PartitionCell::kNeutralCovered;
    return {cell, cell};
  }
  const PartitionCell lower = sets.tilde_leq.empty()
                                  ? PartitionCell::kNonneutralUncoveredLow
                                  : PartitionCell::kNonneutralCoveredLow;
  const PartitionCell upper = sets.tilde_geq.empty()
                                  ? PartitionCell::kNonneutralUncoveredHigh
                                  : PartitionCell::kNonneutralCoveredHigh;
  return {lower, upper};
}

}  // namespace trialbounds
