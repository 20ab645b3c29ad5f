#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trialbounds/bounds.hpp"
#include "trialbounds/dataset.hpp"

namespace trialbounds::sim {

// The synthetic alerting-trial world: a 4-level baseline-health covariate,
// binary alert actions with "0" neutral, disease onset driven by the
// covariate, and survival driven by covariate, alert and the deployed
// model's accuracy.
//
// kPaper is the assumption-satisfying process. The two violating variants
// are single-term edits used to measure the power of the falsification
// tests: kAntiMonotone makes the benefit of an alert fall steeply as model
// accuracy rises (breaking performance monotonicity only), and
// kNeutralViolating adds an accuracy-dependent bonus to no-alert survival in
// non-control arms (breaking the neutral-action assumption only).
enum class DgpVariant { kPaper, kAntiMonotone, kNeutralViolating };

const char* to_string(DgpVariant variant);

constexpr std::size_t kSupportSize = 4;

struct ArmSpec {
  std::string id;
  std::array<int, kSupportSize> action_by_x{};
};

struct DgpSpec {
  DgpVariant variant = DgpVariant::kPaper;
  std::vector<ArmSpec> arms;

  // Variant with its default trial arms: pi0/pi1/pi2 for kPaper and
  // kNeutralViolating, pi0/pi1/pi3 for kAntiMonotone.
  static DgpSpec make(DgpVariant variant);
};

// P(disease onset | X = x).
double onset_probability(int x);

// Action maps for the named policies used throughout the simulation study:
// pi0 (never alert), pi1 = 1{X=1}, pi2 = 1{X in {2,3}}, pi3 = 1{X in {1,2}},
// pi_e0 = 1{X in {1,2,3}}, pi_e1 = 1{X in {0,1}}, pi_always.
std::array<int, kSupportSize> standard_action_map(const std::string& name);

// Exact accuracy of an action map at predicting disease onset.
double true_accuracy(std::span<const int> action_by_x);

// Exact expected survival under deployment of the policy (its own accuracy
// feeding the trust term), honoring the variant's outcome model.
double true_policy_value(std::span<const int> action_by_x,
                         const DgpSpec& dgp = DgpSpec::make(DgpVariant::kPaper));

// Analytic conditional survival E[Y | X=x, A=a] in an arm with accuracy m.
// `control_arm` marks the all-neutral control (exempt from the
// kNeutralViolating bonus).
double conditional_survival(const DgpSpec& dgp, int x, int action, double m,
                            bool control_arm);

// Independent oracle for the population bounds: brute-force enumeration of
// the conditional-bound branches over x using analytic means, written
// without touching the policy-set or bound-engine code paths. The evaluated
// policy's performance is its exact accuracy.
std::pair<double, double> oracle_exact_bounds(std::span<const int> pi_e_map,
                                              const DgpSpec& dgp);

// Population quantities packaged for the bound engine: exact covariate
// weights and analytic per-(x, arm) means, control arm registered without a
// performance.
BoundInputs population_inputs(const DgpSpec& dgp);

// The same registry as population_inputs, for building datasets or
// evaluation policies against it.
std::vector<PolicySpec> trial_registry(const DgpSpec& dgp);

struct SimOutput {
  TrialDataset dataset;
  std::vector<std::uint8_t> latent_onset;  // diagnostics only
  std::uint64_t seed = 0;
};

// Draws n records from the structural model. Each record's randomness is a
// pure function of (seed, record index), so generation is OpenMP-parallel
// and bit-identical across thread counts.
SimOutput simulate_trial(std::size_t n, std::uint64_t seed, const DgpSpec& dgp);

namespace reference {
// Serial single-loop generator, kept for the parallel-equivalence tests and
// the benchmark.
SimOutput simulate_trial(std::size_t n, std::uint64_t seed, const DgpSpec& dgp);
}  // namespace reference

// Diagnostics CSV with header `unit_id,onset`.
std::string latent_csv_text(const SimOutput& output);

}  // namespace trialbounds::sim
