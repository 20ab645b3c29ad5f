#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trialbounds/dataset.hpp"

namespace trialbounds {

// The candidate policy under evaluation: a total action map plus its known
// performance value.
struct EvaluationPolicy {
  std::string id;
  std::vector<int> action_by_x;
  double performance = 0.0;
};

// The five policy sets at one covariate value, as sorted registry indices.
// agree holds every trialed policy matching the evaluated action; leq/geq
// restrict by performance; the tilde sets keep only the next-worst /
// next-best performers (full tie sets).
struct PolicySetsAtX {
  std::vector<int> agree;
  std::vector<int> leq;
  std::vector<int> geq;
  std::vector<int> tilde_leq;
  std::vector<int> tilde_geq;
};

// Which branch of the bound construction a covariate value falls into. The
// lower bound uses the *Low tags, the upper bound the *High tags; neutral
// tags are shared.
enum class PartitionCell {
  kNonneutralCoveredLow,
  kNonneutralUncoveredLow,
  kNonneutralCoveredHigh,
  kNonneutralUncoveredHigh,
  kNeutralCovered,
  kNeutralUncovered,
};

const char* to_string(PartitionCell cell);

// Enumerates the policy sets at covariate index x. Policies without a
// defined performance join agree but never leq/geq; if one of them matches a
// non-neutral evaluated action, the required comparison is impossible and
// UndefinedPerformanceError is thrown. perf_eps > 0 treats performances
// within eps as equal, both for the leq/geq filters and the tie sets.
PolicySetsAtX sets_at(std::span<const PolicySpec> registry,
                      const EvaluationPolicy& pi_e, int x,
                      std::optional<int> neutral_action,
                      double perf_eps = 0.0);

// Maps set emptiness to the (lower, upper) partition cells. With no neutral
// action designated the neutral branches are unreachable.
std::pair<PartitionCell, PartitionCell> classify(
    const PolicySetsAtX& sets, int pi_e_action,
    std::optional<int> neutral_action);

}  // namespace trialbounds
