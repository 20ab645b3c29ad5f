#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_support.hpp"
#include "trialbounds/bounds.hpp"
#include "trialbounds/errors.hpp"
#include "trialbounds/estimator.hpp"
#include "trialbounds/sim.hpp"
#include "trialbounds/stats.hpp"

using namespace trialbounds;
using sim::DgpSpec;
using sim::DgpVariant;

namespace {

const DgpSpec kPaperDgp = DgpSpec::make(DgpVariant::kPaper);

EvaluationPolicy eval_from_map(const std::string& name) {
  const auto map = sim::standard_action_map(name);
  EvaluationPolicy pi_e;
  pi_e.id = name;
  pi_e.action_by_x.assign(map.begin(), map.end());
  pi_e.performance = sim::true_accuracy(map);
  return pi_e;
}

// Tiny three-arm dataset with one record slot we can probe directly.
TrialDataset probe_dataset(std::vector<TrialRecord> records) {
  return TrialDataset::create({"0", "1", "2", "3"}, {"0", "1"}, 0, 0.0, 1.0,
                              testsupport::paper_registry(),
                              std::move(records));
}

}  // namespace

TEST_CASE("psi piecewise values match the hand-derived cases") {
  const EvaluationPolicy e0 = testsupport::pi_e0();
  const EvaluationPolicy e1 = testsupport::pi_e1();

  // record in pi1's arm at x=1 with y=1: in tilde_leq, P = 1/3
  TrialDataset ds = probe_dataset({{"u0", "c1", 1, 1, 1, 1.0}});
  CHECK(std::fabs(psi_lower(ds, e0, ds.records()[0]) - 3.0) < 1e-12);
  // same position is uncovered from above: psi_U pins to y_max
  CHECK(psi_upper(ds, e0, ds.records()[0]) == 1.0);

  // record in pi0's arm at x=1: covered branch, arm outside the tie set
  ds = probe_dataset({{"u0", "c0", 0, 1, 0, 1.0}});
  CHECK(psi_lower(ds, e0, ds.records()[0]) == 0.0);

  // x=0 under pi_e1: non-neutral and nobody ever alerted there
  ds = probe_dataset({{"u0", "c2", 2, 0, 0, 0.0}});
  CHECK(psi_lower(ds, e1, ds.records()[0]) == 0.0);  // y_min branch
  CHECK(psi_upper(ds, e1, ds.records()[0]) == 1.0);  // y_max branch

  // neutral branch with full agreement: weight 1/P(all arms) ~ 1
  ds = probe_dataset({{"u0", "c0", 0, 0, 0, 0.0}});
  CHECK(psi_upper(ds, e0, ds.records()[0]) == 0.0);

  // exact performance tie: both psi values weight by 1/(1/3)
  const EvaluationPolicy same_as_pi2{"pi2_copy", {0, 0, 1, 1}, 0.375};
  ds = probe_dataset({{"u0", "c2", 2, 2, 1, 1.0}});
  CHECK(std::fabs(psi_lower(ds, same_as_pi2, ds.records()[0]) - 3.0) < 1e-12);
  CHECK(std::fabs(psi_upper(ds, same_as_pi2, ds.records()[0]) - 3.0) < 1e-12);
}

TEST_CASE("kernel psi values equal the per-record reference path") {
  const sim::SimOutput out = sim::simulate_trial(4000, 17, kPaperDgp);
  for (const char* name : {"pi_e0", "pi_e1", "pi2"}) {
    const EvaluationPolicy pi_e = eval_from_map(name);
    for (SetMode mode : {SetMode::kTight, SetMode::kRelaxed}) {
      const PsiVectors fast = psi_values(out.dataset, pi_e, mode);
      const PsiVectors slow = reference::psi_values(out.dataset, pi_e, mode);
      REQUIRE(fast.lower.size() == slow.lower.size());
      for (std::size_t i = 0; i < fast.lower.size(); ++i) {
        CHECK(fast.lower[i] == slow.lower[i]);
        CHECK(fast.upper[i] == slow.upper[i]);
      }
    }
  }
}

TEST_CASE("psi draws are bounded by the design probabilities") {
  const sim::SimOutput out = sim::simulate_trial(3000, 23, kPaperDgp);
  double min_prob = 1.0;
  for (const PolicySpec& spec : out.dataset.policies()) {
    min_prob = std::min(min_prob, spec.arm_prob);
  }
  const double cap = std::max(std::fabs(out.dataset.y_min()),
                              std::fabs(out.dataset.y_max())) /
                     min_prob;
  for (std::uint64_t k = 0; k < 25; ++k) {
    const EvaluationPolicy pi_e = testsupport::random_policy(9, k);
    const PsiVectors psi = psi_values(out.dataset, pi_e, SetMode::kTight);
    for (std::size_t i = 0; i < psi.lower.size(); ++i) {
      CHECK(std::fabs(psi.lower[i]) <= cap + 1e-12);
      CHECK(std::fabs(psi.upper[i]) <= cap + 1e-12);
    }
  }
}

TEST_CASE("estimate_bounds recovers the population bounds at n=5000") {
  const sim::SimOutput out = sim::simulate_trial(5000, 11, kPaperDgp);
  const BoundsReport r =
      estimate_bounds(out.dataset, eval_from_map("pi_e0"), 0.05);
  CHECK(std::fabs(r.lower - 0.711) < 0.05);
  CHECK(std::fabs(r.upper - 0.865) < 0.05);
  CHECK(r.n == 5000);
  CHECK(r.ci_low < r.lower);
  CHECK(r.ci_high > r.upper);
  CHECK(r.sd_lower > 0.0);

  const BoundsReport r1 =
      estimate_bounds(out.dataset, eval_from_map("pi_e1"), 0.05);
  CHECK(std::fabs(r1.lower - 0.44475) < 0.05);
  CHECK(std::fabs(r1.upper - 0.7525) < 0.05);
}

TEST_CASE("confidence intervals nest in alpha and follow the formula") {
  const sim::SimOutput out = sim::simulate_trial(2000, 13, kPaperDgp);
  const EvaluationPolicy pi_e = eval_from_map("pi_e0");
  const BoundsReport wide = estimate_bounds(out.dataset, pi_e, 0.05);
  const BoundsReport narrow = estimate_bounds(out.dataset, pi_e, 0.32);
  CHECK(wide.ci_low < narrow.ci_low);
  CHECK(wide.ci_high > narrow.ci_high);
  CHECK(narrow.lower == wide.lower);

  const double z = stats::normal_quantile(1.0 - 0.05 / 2.0);
  CHECK(std::fabs(wide.ci_low -
                  (wide.lower - z * wide.sd_lower / std::sqrt(2000.0))) <
        1e-12);
  CHECK(std::fabs(wide.ci_high -
                  (wide.upper + z * wide.sd_upper / std::sqrt(2000.0))) <
        1e-12);
}

TEST_CASE("plug-in and IPW estimates coincide on balanced designs") {
  // per-cell balance makes the empirical conditional arm frequencies equal
  // the design probabilities, turning the identity exact
  for (bool neutral : {false, true}) {
    testsupport::BalancedSpec spec;
    spec.neutral = neutral;
    const TrialDataset ds = testsupport::balanced_dataset(spec);
    for (std::uint64_t k = 0; k < 40; ++k) {
      const EvaluationPolicy pi_e = testsupport::random_policy(55, k);
      const PsiVectors psi = psi_values(ds, pi_e, SetMode::kTight);
      double sum_low = 0.0, sum_high = 0.0;
      for (std::size_t i = 0; i < psi.lower.size(); ++i) {
        sum_low += psi.lower[i];
        sum_high += psi.upper[i];
      }
      const double n = static_cast<double>(ds.size());
      const BoundsResult plugin = exact_bounds(ds, pi_e, SetMode::kTight);
      CHECK(std::fabs(sum_low / n - plugin.lower) < 1e-9);
      CHECK(std::fabs(sum_high / n - plugin.upper) < 1e-9);
    }
  }
}

TEST_CASE("sandwich collapse is exact on a balanced no-neutral design") {
  const TrialDataset ds = testsupport::balanced_dataset({});
  for (int p = 0; p < 3; ++p) {
    const PolicySpec& arm = ds.policies()[static_cast<std::size_t>(p)];
    EvaluationPolicy pi_e{arm.id + "_eval", arm.action_by_x, *arm.performance};
    const BoundsReport r = estimate_bounds(ds, pi_e, 0.05);
    const double arm_mean = ds.arm_sum(p) / static_cast<double>(ds.arm_count(p));
    CHECK(std::fabs(r.lower - arm_mean) < 1e-12);
    CHECK(std::fabs(r.upper - arm_mean) < 1e-12);
    const BoundsResult plugin = exact_bounds(ds, pi_e, SetMode::kTight);
    CHECK(std::fabs(plugin.lower - arm_mean) < 1e-12);
    CHECK(std::fabs(plugin.upper - arm_mean) < 1e-12);
  }
}

TEST_CASE("single-arm constant outcomes give a zero-width report") {
  std::vector<PolicySpec> policies{{"pi0", {0, 0, 0, 0}, std::nullopt, 1.0}};
  std::vector<TrialRecord> records;
  for (int i = 0; i < 8; ++i) {
    records.push_back({"u" + std::to_string(i), "c0", 0, i % 4, 0, 0.7});
  }
  const TrialDataset ds = TrialDataset::create(
      {"0", "1", "2", "3"}, {"0", "1"}, 0, 0.0, 1.0, policies, records);
  const EvaluationPolicy never{"never", {0, 0, 0, 0}, 0.0};
  const BoundsReport r = estimate_bounds(ds, never, 0.05);
  CHECK(r.lower == doctest::Approx(0.7));
  CHECK(r.upper == doctest::Approx(0.7));
  CHECK(r.sd_lower == doctest::Approx(0.0));
  CHECK(r.ci_low == doctest::Approx(0.7));
  CHECK(r.ci_high == doctest::Approx(0.7));
}

TEST_CASE("estimates track the population bounds within 4 standard errors") {
  const EvaluationPolicy pi_e = eval_from_map("pi_e0");
  int within = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const sim::SimOutput out = sim::simulate_trial(
        2000, 40000 + static_cast<std::uint64_t>(s), kPaperDgp);
    const BoundsReport r = estimate_bounds(out.dataset, pi_e, 0.05);
    const double margin_l = 4.0 * r.sd_lower / std::sqrt(2000.0);
    const double margin_u = 4.0 * r.sd_upper / std::sqrt(2000.0);
    if (std::fabs(r.lower - 0.711) <= margin_l &&
        std::fabs(r.upper - 0.865) <= margin_u) {
      ++within;
    }
  }
  CHECK(within >= 99);
}

TEST_CASE("the CI margin shrinks like one over root n") {
  const EvaluationPolicy pi_e = eval_from_map("pi_e0");
  const sim::SimOutput small = sim::simulate_trial(1000, 3, kPaperDgp);
  const sim::SimOutput large = sim::simulate_trial(9000, 3, kPaperDgp);
  const BoundsReport rs = estimate_bounds(small.dataset, pi_e, 0.05);
  const BoundsReport rl = estimate_bounds(large.dataset, pi_e, 0.05);
  const double margin_small = rs.lower - rs.ci_low;
  const double margin_large = rl.lower - rl.ci_low;
  CHECK(margin_large < margin_small);
  // about a factor of 3 at nine times the sample size
  CHECK(margin_small / margin_large == doctest::Approx(3.0).epsilon(0.25));
}

TEST_CASE("trialed arm values") {
  const sim::SimOutput out = sim::simulate_trial(5000, 11, kPaperDgp);
  const ArmValue pi0 = trialed_arm_value(out.dataset, "pi0", 0.05);
  CHECK(std::fabs(pi0.mean - 0.46) < 0.04);
  CHECK(pi0.ci_low < pi0.mean);
  CHECK(pi0.ci_high > pi0.mean);
  const ArmValue pi1 = trialed_arm_value(out.dataset, "pi1", 0.05);
  CHECK(std::fabs(pi1.mean - 0.55975) < 0.04);

  CHECK_THROWS_AS(trialed_arm_value(out.dataset, "pi9", 0.05), RegistryError);

  // an arm with a single record has no variance
  std::vector<TrialRecord> records{{"u0", "c0", 0, 0, 0, 0.5},
                                   {"u1", "c1", 1, 0, 0, 0.5},
                                   {"u2", "c1", 1, 1, 1, 1.0}};
  const TrialDataset tiny = TrialDataset::create(
      {"0", "1", "2", "3"}, {"0", "1"}, 0, 0.0, 1.0,
      testsupport::paper_registry(), records);
  CHECK_THROWS_AS(trialed_arm_value(tiny, "pi0", 0.05), DegenerateError);
}

TEST_CASE("estimator preconditions") {
  std::vector<PolicySpec> policies{{"arm", {0}, 0.5, 1.0}};
  const TrialDataset empty =
      TrialDataset::create({"0"}, {"0"}, std::nullopt, 0.0, 1.0, policies, {});
  const EvaluationPolicy pi_e{"e", {0}, 0.5};
  CHECK_THROWS_AS(estimate_bounds(empty, pi_e, 0.05), EmptyDatasetError);

  const TrialDataset single = TrialDataset::create(
      {"0"}, {"0"}, std::nullopt, 0.0, 1.0, policies,
      {{"u0", "c", 0, 0, 0, 0.5}});
  CHECK_THROWS_AS(estimate_bounds(single, pi_e, 0.05), DegenerateError);

  const TrialDataset two = TrialDataset::create(
      {"0"}, {"0"}, std::nullopt, 0.0, 1.0, policies,
      {{"u0", "c", 0, 0, 0, 0.5}, {"u1", "c", 0, 0, 0, 0.75}});
  CHECK_THROWS_AS(estimate_bounds(two, pi_e, 0.0), DomainError);
  CHECK_THROWS_AS(estimate_bounds(two, pi_e, 1.0), DomainError);
}
