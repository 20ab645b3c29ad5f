#include "trialbounds/falsification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "trialbounds/errors.hpp"
#include "trialbounds/rng.hpp"
#include "trialbounds/stats.hpp"

namespace trialbounds {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<double> region_outcomes(const TrialDataset& dataset, int policy,
                                    const std::vector<int>& region) {
  std::vector<bool> in_region(dataset.covariate_support().size(), false);
  for (int x : region) in_region[static_cast<std::size_t>(x)] = true;
  std::vector<double> out;
  for (const TrialRecord& r : dataset.records()) {
    if (r.policy == policy && in_region[static_cast<std::size_t>(r.x)]) {
      out.push_back(r.outcome);
    }
  }
  return out;
}

// Permutation p-values for the mean difference mean(high) - mean(low).
// Resamples are independent counter-seeded streams, so the loop parallelizes
// with bit-identical counts across thread counts.
struct PermutationResult {
  double observed = 0.0;
  double p_less = 0.0;
  double p_two_sided = 0.0;
};

PermutationResult permutation_test(const std::vector<double>& low,
                                   const std::vector<double>& high,
                                   std::uint64_t pair_key, int permutations) {
  std::vector<double> pooled;
  pooled.reserve(low.size() + high.size());
  pooled.insert(pooled.end(), low.begin(), low.end());
  pooled.insert(pooled.end(), high.begin(), high.end());

  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const double n_low = static_cast<double>(low.size());
  const double n_high = static_cast<double>(high.size());
  const double sum_low = std::accumulate(low.begin(), low.end(), 0.0);

  PermutationResult result;
  result.observed = (total - sum_low) / n_high - sum_low / n_low;
  const double obs_abs = std::fabs(result.observed);

  std::int64_t count_less = 0;
  std::int64_t count_extreme = 0;
#pragma omp parallel for schedule(static) \
    reduction(+ : count_less, count_extreme)
  for (int b = 0; b < permutations; ++b) {
    SequentialRng rng(mix64(pair_key ^ mix64(static_cast<std::uint64_t>(b))));
    std::vector<double> draw = pooled;
    // Partial Fisher-Yates: the first n_low entries form the resampled
    // low-arm group.
    for (std::size_t i = 0; i < low.size(); ++i) {
      const std::size_t j = i + rng.below(draw.size() - i);
      std::swap(draw[i], draw[j]);
    }
    double resampled_low = 0.0;
    for (std::size_t i = 0; i < low.size(); ++i) resampled_low += draw[i];
    const double diff =
        (total - resampled_low) / n_high - resampled_low / n_low;
    if (diff <= result.observed) ++count_less;
    if (std::fabs(diff) >= obs_abs) ++count_extreme;
  }
  const double denom = static_cast<double>(permutations) + 1.0;
  result.p_less = (1.0 + static_cast<double>(count_less)) / denom;
  result.p_two_sided = (1.0 + static_cast<double>(count_extreme)) / denom;
  return result;
}

int require_policy(const TrialDataset& dataset, const std::string& id) {
  const int p = dataset.policy_index(id);
  if (p < 0) {
    throw RegistryError("unknown policy id '" + id + "'");
  }
  return p;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw DomainError("alpha must lie in (0, 1)");
  }
}

// Shared core once the pair has been ordered and the region fixed.
TestReport run_two_sample(const TrialDataset& dataset, Assumption assumption,
                          int low, int high, const std::vector<int>& region,
                          double alpha, const FalsifyOptions& options) {
  TestReport report;
  report.assumption = assumption;
  report.low_policy_id = dataset.policies()[static_cast<std::size_t>(low)].id;
  report.high_policy_id =
      dataset.policies()[static_cast<std::size_t>(high)].id;
  report.region = region;
  report.alpha = alpha;
  report.method = options.method;

  if (region.empty()) {
    throw RegionEmptyError("falsification: the comparison region is empty");
  }
  const std::vector<double> low_sample =
      region_outcomes(dataset, low, region);
  const std::vector<double> high_sample =
      region_outcomes(dataset, high, region);
  if (low_sample.size() < 2 || high_sample.size() < 2) {
    throw InsufficientDataError(
        "falsification: need at least 2 records per arm inside the region "
        "(got " +
        std::to_string(low_sample.size()) + " for " + report.low_policy_id +
        ", " + std::to_string(high_sample.size()) + " for " +
        report.high_policy_id + ")");
  }
  report.n_low = low_sample.size();
  report.n_high = high_sample.size();

  const bool one_sided = assumption == Assumption::kPerformanceMonotonicity;
  if (options.method == TestMethod::kWelchT) {
    const stats::MeanVar low_mv = stats::mean_variance(low_sample);
    const stats::MeanVar high_mv = stats::mean_variance(high_sample);
    report.mean_low = low_mv.mean;
    report.mean_high = high_mv.mean;
    const stats::WelchResult welch = stats::welch_t(high_mv, low_mv);
    report.statistic = welch.statistic;
    report.p_value = one_sided ? welch.p_less : welch.p_two_sided;
  } else {
    const std::uint64_t pair_key =
        mix64(mix64(options.seed) ^ fnv1a(std::string(to_string(assumption)) +
                                          "|" + report.low_policy_id + "|" +
                                          report.high_policy_id));
    const PermutationResult perm = permutation_test(
        low_sample, high_sample, pair_key, options.permutations);
    report.mean_low = std::accumulate(low_sample.begin(), low_sample.end(),
                                      0.0) /
                      static_cast<double>(low_sample.size());
    report.mean_high = std::accumulate(high_sample.begin(), high_sample.end(),
                                       0.0) /
                       static_cast<double>(high_sample.size());
    report.statistic = perm.observed;
    report.p_value = one_sided ? perm.p_less : perm.p_two_sided;
  }
  report.p_adjusted = report.p_value;
  report.rejected = report.p_value < alpha;
  report.rejected_adjusted = report.rejected;
  return report;
}

}  // namespace

const char* to_string(Assumption assumption) {
  switch (assumption) {
    case Assumption::kPerformanceMonotonicity:
      return "performance_monotonicity";
    case Assumption::kNeutralActions:
      return "neutral_actions";
  }
  return "unknown";
}

const char* to_string(TestMethod method) {
  switch (method) {
    case TestMethod::kWelchT:
      return "welch_t";
    case TestMethod::kPermutation:
      return "permutation";
  }
  return "unknown";
}

const char* to_string(TestStatus status) {
  switch (status) {
    case TestStatus::kOk:
      return "ok";
    case TestStatus::kSkipped:
      return "skipped";
  }
  return "unknown";
}

std::vector<int> agreement_region(const PolicySpec& p1, const PolicySpec& p2,
                                  std::size_t support_size) {
  std::vector<int> region;
  for (std::size_t x = 0; x < support_size; ++x) {
    if (p1.action_by_x.at(x) == p2.action_by_x.at(x)) {
      region.push_back(static_cast<int>(x));
    }
  }
  return region;
}

std::vector<int> neutral_region(const PolicySpec& p1, const PolicySpec& p2,
                                int neutral_action,
                                std::size_t support_size) {
  std::vector<int> region;
  for (std::size_t x = 0; x < support_size; ++x) {
    if (p1.action_by_x.at(x) == neutral_action &&
        p2.action_by_x.at(x) == neutral_action) {
      region.push_back(static_cast<int>(x));
    }
  }
  return region;
}

TestReport test_monotonicity(const TrialDataset& dataset,
                             const std::string& id1, const std::string& id2,
                             double alpha, const FalsifyOptions& options) {
  require_alpha(alpha);
  int a = require_policy(dataset, id1);
  int b = require_policy(dataset, id2);
  const auto& policies = dataset.policies();
  const std::optional<double> perf_a =
      policies[static_cast<std::size_t>(a)].performance;
  const std::optional<double> perf_b =
      policies[static_cast<std::size_t>(b)].performance;
  if (!perf_a || !perf_b) {
    throw UndefinedPerformanceError(
        "test_monotonicity: both policies need a defined performance");
  }
  if (*perf_a == *perf_b) {
    throw ConfigError(
        "test_monotonicity: the policies must differ in performance");
  }
  if (*perf_a > *perf_b) std::swap(a, b);
  const std::vector<int> region =
      agreement_region(policies[static_cast<std::size_t>(a)],
                       policies[static_cast<std::size_t>(b)],
                       dataset.covariate_support().size());
  return run_two_sample(dataset, Assumption::kPerformanceMonotonicity, a, b,
                        region, alpha, options);
}

TestReport test_neutral_action(const TrialDataset& dataset,
                               const std::string& id1, const std::string& id2,
                               double alpha, const FalsifyOptions& options) {
  require_alpha(alpha);
  int a = require_policy(dataset, id1);
  int b = require_policy(dataset, id2);
  if (!dataset.neutral_action()) {
    throw ConfigError("test_neutral_action: no neutral action designated");
  }
  const auto& policies = dataset.policies();
  // Order by performance where defined; an undefined performance (control
  // arm) sorts lowest.
  const double lowest = -std::numeric_limits<double>::infinity();
  const double perf_a =
      policies[static_cast<std::size_t>(a)].performance.value_or(lowest);
  const double perf_b =
      policies[static_cast<std::size_t>(b)].performance.value_or(lowest);
  if (perf_a > perf_b ||
      (perf_a == perf_b && policies[static_cast<std::size_t>(a)].id >
                               policies[static_cast<std::size_t>(b)].id)) {
    std::swap(a, b);
  }
  const std::vector<int> region =
      neutral_region(policies[static_cast<std::size_t>(a)],
                     policies[static_cast<std::size_t>(b)],
                     *dataset.neutral_action(),
                     dataset.covariate_support().size());
  return run_two_sample(dataset, Assumption::kNeutralActions, a, b, region,
                        alpha, options);
}

std::vector<TestReport> run_all_pairs(const TrialDataset& dataset, double alpha,
                                      const FalsifyOptions& options) {
  require_alpha(alpha);
  const auto& policies = dataset.policies();
  std::vector<TestReport> reports;

  auto skipped = [&](Assumption assumption, std::size_t i, std::size_t j,
                     const std::string& reason) {
    TestReport report;
    report.assumption = assumption;
    report.low_policy_id = policies[i].id;
    report.high_policy_id = policies[j].id;
    report.alpha = alpha;
    report.method = options.method;
    report.status = TestStatus::kSkipped;
    report.skip_reason = reason;
    return report;
  };

  for (std::size_t i = 0; i < policies.size(); ++i) {
    for (std::size_t j = i + 1; j < policies.size(); ++j) {
      // Performance monotonicity needs an ordered pair of performances.
      if (!policies[i].performance || !policies[j].performance) {
        reports.push_back(skipped(Assumption::kPerformanceMonotonicity, i, j,
                                  "performance undefined"));
      } else if (*policies[i].performance == *policies[j].performance) {
        reports.push_back(skipped(Assumption::kPerformanceMonotonicity, i, j,
                                  "equal performances"));
      } else {
        try {
          reports.push_back(test_monotonicity(dataset, policies[i].id,
                                              policies[j].id, alpha, options));
        } catch (const RegionEmptyError&) {
          reports.push_back(skipped(Assumption::kPerformanceMonotonicity, i, j,
                                    "agreement region empty"));
        } catch (const InsufficientDataError& e) {
          reports.push_back(
              skipped(Assumption::kPerformanceMonotonicity, i, j, e.what()));
        }
      }

      if (dataset.neutral_action()) {
        try {
          reports.push_back(test_neutral_action(dataset, policies[i].id,
                                                policies[j].id, alpha,
                                                options));
        } catch (const RegionEmptyError&) {
          reports.push_back(skipped(Assumption::kNeutralActions, i, j,
                                    "neutral region empty"));
        } catch (const InsufficientDataError& e) {
          reports.push_back(skipped(Assumption::kNeutralActions, i, j,
                                    e.what()));
        }
      }
    }
  }

  // Holm step-down across every p-value actually computed.
  std::vector<std::size_t> tested;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (reports[k].status == TestStatus::kOk) tested.push_back(k);
  }
  std::stable_sort(tested.begin(), tested.end(), [&](std::size_t a, std::size_t b) {
    return reports[a].p_value < reports[b].p_value;
  });
  const double m = static_cast<double>(tested.size());
  double running = 0.0;
  for (std::size_t rank = 0; rank < tested.size(); ++rank) {
    TestReport& report = reports[tested[rank]];
    const double scaled =
        std::min(1.0, (m - static_cast<double>(rank)) * report.p_value);
    running = std::max(running, scaled);
    report.p_adjusted = running;
    report.rejected_adjusted = report.p_adjusted < alpha;
  }
  return reports;
}

}  // namespace trialbounds
