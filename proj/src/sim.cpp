#include "trialbounds/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "trialbounds/errors.hpp"
#include "trialbounds/rng.hpp"

namespace trialbounds::sim {

namespace {

// Latent construction: everyone without disease survives; the tables below
// give survival among the diseased, without alerts and the extra gain an
// alert provides at full trust.
constexpr std::array<double, kSupportSize> kOnset = {0.9, 0.7, 0.6, 0.5};
constexpr std::array<double, kSupportSize> kDiseaseSurvivalNoAlert = {0.4, 0.1,
                                                                      0.1, 0.1};
constexpr std::array<double, kSupportSize> kDiseaseAlertGain = {0.2, 0.8, 0.8,
                                                                0.8};

// Anti-monotone trust multiplier: ramps from 1 to 0 over accuracies
// [0.35, 0.475]. The slope must be steep enough that the 0.05 accuracy gap
// between the trialed arms moves outcomes detectably at n = 5000; the
// paper-style (1 - m)/2 flip shifts agreement-region means by under 0.005,
// which no test can see at that sample size.
constexpr double kAntiMonotoneSlope = 8.0;
constexpr double kAntiMonotonePivot = 0.35;

// Accuracy-dependent bonus to no-alert survival under a deployed non-control
// arm (the neutral-action violation).
constexpr double kNeutralViolationGain = 0.2;

double alert_multiplier(DgpVariant variant, double m) {
  if (variant == DgpVariant::kAntiMonotone) {
    return std::clamp(1.0 - kAntiMonotoneSlope * (m - kAntiMonotonePivot), 0.0,
                      1.0);
  }
  return (1.0 + m) / 2.0;
}

bool all_neutral(std::span<const int> action_by_x) {
  return std::all_of(action_by_x.begin(), action_by_x.end(),
                     [](int a) { return a == 0; });
}

// Survival probability among the diseased, the quantity the generator draws
// against once the latent onset is known.
double disease_survival(const DgpSpec& dgp, int x, int action, double m,
                        bool control_arm) {
  const std::size_t xi = static_cast<std::size_t>(x);
  double p = kDiseaseSurvivalNoAlert[xi];
  if (action != 0) {
    p += alert_multiplier(dgp.variant, m) * kDiseaseAlertGain[xi];
  } else if (dgp.variant == DgpVariant::kNeutralViolating && !control_arm) {
    // +0.2 m on the marginal survival scale, applied on the diseased stratum
    // so the latent onset draw stays consistent.
    p += kNeutralViolationGain * m / kOnset[xi];
  }
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw ConfigError("DGP produced a survival probability outside [0, 1]");
  }
  return p;
}

struct ArmInfo {
  double accuracy = 0.0;
  bool control = false;
};

std::vector<ArmInfo> arm_infos(const DgpSpec& dgp) {
  std::vector<ArmInfo> infos;
  infos.reserve(dgp.arms.size());
  for (const ArmSpec& arm : dgp.arms) {
    infos.push_back({true_accuracy(arm.action_by_x), all_neutral(arm.action_by_x)});
  }
  return infos;
}

// Stream labels for the three independent random substreams.
constexpr std::uint64_t kAssignStream = 0x61737369676eULL;   // "assign"
constexpr std::uint64_t kOnsetStream = 0x6f6e736574ULL;      // "onset"
constexpr std::uint64_t kOutcomeStream = 0x6f7574636f6dULL;  // "outcom"

struct GeneratedRecord {
  int x = 0;
  int arm = 0;
  int action = 0;
  std::uint8_t onset = 0;
  double outcome = 0.0;
};

class RecordGenerator {
 public:
  RecordGenerator(std::uint64_t seed, const DgpSpec& dgp)
      : dgp_(dgp),
        infos_(arm_infos(dgp)),
        assign_(seed, kAssignStream),
        onset_(seed, kOnsetStream),
        outcome_(seed, kOutcomeStream) {}

  GeneratedRecord operator()(std::uint64_t i) const {
    GeneratedRecord rec;
    rec.x = static_cast<int>(
        std::min<std::uint64_t>(kSupportSize - 1,
                                static_cast<std::uint64_t>(
                                    assign_.uniform(2 * i) * kSupportSize)));
    rec.arm = static_cast<int>(std::min<std::uint64_t>(
        dgp_.arms.size() - 1,
        static_cast<std::uint64_t>(assign_.uniform(2 * i + 1) *
                                   dgp_.arms.size())));
    rec.action =
        dgp_.arms[static_cast<std::size_t>(rec.arm)].action_by_x[static_cast<std::size_t>(rec.x)];
    rec.onset =
        onset_.uniform(i) < kOnset[static_cast<std::size_t>(rec.x)] ? 1 : 0;
    const ArmInfo& info = infos_[static_cast<std::size_t>(rec.arm)];
    const double survival =
        rec.onset == 0 ? 1.0
                       : disease_survival(dgp_, rec.x, rec.action,
                                          info.accuracy, info.control);
    rec.outcome = outcome_.uniform(i) < survival ? 1.0 : 0.0;
    return rec;
  }

 private:
  const DgpSpec& dgp_;
  std::vector<ArmInfo> infos_;
  CounterStream assign_;
  CounterStream onset_;
  CounterStream outcome_;
};

TrialRecord to_record(const GeneratedRecord& g, std::size_t i) {
  TrialRecord rec;
  rec.unit_id = "u" + std::to_string(i);
  rec.cluster = "c" + std::to_string(g.arm);
  rec.policy = g.arm;
  rec.x = g.x;
  rec.action = g.action;
  rec.outcome = g.outcome;
  return rec;
}

SimOutput assemble(std::uint64_t seed, const DgpSpec& dgp,
                   std::vector<TrialRecord> records,
                   std::vector<std::uint8_t> latent) {
  SimOutput out{
      TrialDataset::create({"0", "1", "2", "3"}, {"0", "1"}, 0, 0.0, 1.0,
                           trial_registry(dgp), std::move(records)),
      std::move(latent), seed};
  return out;
}

void check_spec(const DgpSpec& dgp, std::size_t n) {
  if (n < 1) {
    throw ConfigError("simulate_trial: n must be at least 1");
  }
  if (dgp.arms.empty()) {
    throw ConfigError("simulate_trial: the DGP needs at least one arm");
  }
  for (const ArmSpec& arm : dgp.arms) {
    for (int a : arm.action_by_x) {
      if (a != 0 && a != 1) {
        throw ConfigError("simulate_trial: arm " + arm.id +
                          " uses an action outside {0, 1}");
      }
    }
  }
}

}  // namespace

const char* to_string(DgpVariant variant) {
  switch (variant) {
    case DgpVariant::kPaper:
      return "paper";
    case DgpVariant::kAntiMonotone:
      return "anti-monotone";
    case DgpVariant::kNeutralViolating:
      return "neutral-violating";
  }
  return "unknown";
}

DgpSpec DgpSpec::make(DgpVariant variant) {
  DgpSpec dgp;
  dgp.variant = variant;
  dgp.arms.push_back({"pi0", standard_action_map("pi0")});
  dgp.arms.push_back({"pi1", standard_action_map("pi1")});
  if (variant == DgpVariant::kAntiMonotone) {
    dgp.arms.push_back({"pi3", standard_action_map("pi3")});
  } else {
    dgp.arms.push_back({"pi2", standard_action_map("pi2")});
  }
  return dgp;
}

double onset_probability(int x) {
  return kOnset.at(static_cast<std::size_t>(x));
}

std::array<int, kSupportSize> standard_action_map(const std::string& name) {
  if (name == "pi0") return {0, 0, 0, 0};
  if (name == "pi1") return {0, 1, 0, 0};
  if (name == "pi2") return {0, 0, 1, 1};
  if (name == "pi3") return {0, 1, 1, 0};
  if (name == "pi_e0") return {0, 1, 1, 1};
  if (name == "pi_e1") return {1, 1, 0, 0};
  if (name == "pi_always") return {1, 1, 1, 1};
  throw ConfigError("unknown standard policy '" + name + "'");
}

double true_accuracy(std::span<const int> action_by_x) {
  double total = 0.0;
  for (std::size_t x = 0; x < kSupportSize; ++x) {
    total += action_by_x[x] != 0 ? kOnset[x] : 1.0 - kOnset[x];
  }
  return total / static_cast<double>(kSupportSize);
}

double conditional_survival(const DgpSpec& dgp, int x, int action, double m,
                            bool control_arm) {
  const std::size_t xi = static_cast<std::size_t>(x);
  const double with_disease = disease_survival(dgp, x, action, m, control_arm);
  return (1.0 - kOnset[xi]) + kOnset[xi] * with_disease;
}

double true_policy_value(std::span<const int> action_by_x, const DgpSpec& dgp) {
  const double m = true_accuracy(action_by_x);
  const bool control = all_neutral(action_by_x);
  double total = 0.0;
  for (std::size_t x = 0; x < kSupportSize; ++x) {
    total += conditional_survival(dgp, static_cast<int>(x), action_by_x[x], m,
                                  control);
  }
  return total / static_cast<double>(kSupportSize);
}

std::pair<double, double> oracle_exact_bounds(std::span<const int> pi_e_map,
                                              const DgpSpec& dgp) {
  const double perf = true_accuracy(pi_e_map);
  const std::vector<ArmInfo> infos = arm_infos(dgp);

  double lower_bound = 0.0;
  double upper_bound = 0.0;
  for (std::size_t x = 0; x < kSupportSize; ++x) {
    const int target = pi_e_map[x];
    std::vector<std::size_t> agree;
    for (std::size_t k = 0; k < dgp.arms.size(); ++k) {
      if (dgp.arms[k].action_by_x[x] == target) agree.push_back(k);
    }

    auto survival_of = [&](std::size_t k) {
      return conditional_survival(dgp, static_cast<int>(x),
                                  dgp.arms[k].action_by_x[x],
                                  infos[k].accuracy, infos[k].control);
    };

    double lo = 0.0;
    double hi = 1.0;
    if (target == 0) {
      if (!agree.empty()) {
        double sum = 0.0;
        for (std::size_t k : agree) sum += survival_of(k);
        lo = hi = sum / static_cast<double>(agree.size());
      }
    } else {
      // Control arms never alert, so every agreeing arm has a defined
      // accuracy here.
      double best_below = -1.0;
      double best_above = 2.0;
      for (std::size_t k : agree) {
        const double acc = infos[k].accuracy;
        if (acc <= perf) best_below = std::max(best_below, acc);
        if (acc >= perf) best_above = std::min(best_above, acc);
      }
      if (best_below >= 0.0) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k : agree) {
          if (infos[k].accuracy == best_below) {
            sum += survival_of(k);
            ++count;
          }
        }
        lo = sum / static_cast<double>(count);
      }
      if (best_above <= 1.0) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k : agree) {
          if (infos[k].accuracy == best_above) {
            sum += survival_of(k);
            ++count;
          }
        }
        hi = sum / static_cast<double>(count);
      }
    }
    lower_bound += lo / static_cast<double>(kSupportSize);
    upper_bound += hi / static_cast<double>(kSupportSize);
  }
  return {lower_bound, upper_bound};
}

std::vector<PolicySpec> trial_registry(const DgpSpec& dgp) {
  std::vector<PolicySpec> registry;
  const double prob = 1.0 / static_cast<double>(dgp.arms.size());
  for (const ArmSpec& arm : dgp.arms) {
    PolicySpec spec;
    spec.id = arm.id;
    spec.action_by_x.assign(arm.action_by_x.begin(), arm.action_by_x.end());
    if (!all_neutral(arm.action_by_x)) {
      spec.performance = true_accuracy(arm.action_by_x);
    }
    spec.arm_prob = prob;
    registry.push_back(std::move(spec));
  }
  return registry;
}

BoundInputs population_inputs(const DgpSpec& dgp) {
  const std::vector<ArmInfo> infos = arm_infos(dgp);
  BoundInputs inputs;
  inputs.policies = trial_registry(dgp);
  inputs.support_size = kSupportSize;
  inputs.neutral_action = 0;
  inputs.y_min = 0.0;
  inputs.y_max = 1.0;
  inputs.pmf.assign(kSupportSize, 1.0 / static_cast<double>(kSupportSize));
  inputs.cells.resize(kSupportSize * dgp.arms.size());
  for (std::size_t x = 0; x < kSupportSize; ++x) {
    for (std::size_t k = 0; k < dgp.arms.size(); ++k) {
      BoundInputs::Cell cell;
      cell.mean = conditional_survival(dgp, static_cast<int>(x),
                                       dgp.arms[k].action_by_x[x],
                                       infos[k].accuracy, infos[k].control);
      cell.weight = inputs.policies[k].arm_prob;
      inputs.cells[x * dgp.arms.size() + k] = cell;
    }
  }
  return inputs;
}

SimOutput simulate_trial(std::size_t n, std::uint64_t seed,
                         const DgpSpec& dgp) {
  check_spec(dgp, n);
  const RecordGenerator generate(seed, dgp);
  std::vector<TrialRecord> records(n);
  std::vector<std::uint8_t> latent(n);
  const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < count; ++i) {
    const std::size_t at = static_cast<std::size_t>(i);
    const GeneratedRecord g = generate(static_cast<std::uint64_t>(i));
    records[at] = to_record(g, at);
    latent[at] = g.onset;
  }
  return assemble(seed, dgp, std::move(records), std::move(latent));
}

namespace reference {

SimOutput simulate_trial(std::size_t n, std::uint64_t seed,
                         const DgpSpec& dgp) {
  check_spec(dgp, n);
  const RecordGenerator generate(seed, dgp);
  std::vector<TrialRecord> records(n);
  std::vector<std::uint8_t> latent(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GeneratedRecord g = generate(static_cast<std::uint64_t>(i));
    records[i] = to_record(g, i);
    latent[i] = g.onset;
  }
  return assemble(seed, dgp, std::move(records), std::move(latent));
}

}  // namespace reference

std::string latent_csv_text(const SimOutput& output) {
  std::string out = "unit_id,onset\n";
  const auto& records = output.dataset.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    out += records[i].unit_id;
    out.push_back(',');
    out += output.latent_onset[i] ? '1' : '0';
    out.push_back('\n');
  }
  return out;
}

}  // namespace trialbounds::sim
