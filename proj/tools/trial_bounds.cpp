// trial_bounds: estimate bounds on the value of an untrialed decision policy
// from cluster-RCT logs, run assumption falsification tests, and reproduce
// the simulation experiment end to end.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trialbounds/bounds.hpp"
#include "trialbounds/dataset_io.hpp"
#include "trialbounds/errors.hpp"
#include "trialbounds/estimator.hpp"
#include "trialbounds/falsification.hpp"
#include "trialbounds/report.hpp"
#include "trialbounds/sim.hpp"

namespace {

using namespace trialbounds;

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("TRIAL_BOUNDS_SEED");
  if (!text) return std::nullopt;
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError("TRIAL_BOUNDS_SEED is not a valid unsigned integer");
  }
}

SetMode parse_set_mode(const std::string& text) {
  return text == "relaxed" ? SetMode::kRelaxed : SetMode::kTight;
}

sim::DgpVariant parse_variant(const std::string& text) {
  if (text == "paper") return sim::DgpVariant::kPaper;
  if (text == "anti-monotone") return sim::DgpVariant::kAntiMonotone;
  if (text == "neutral-violating") return sim::DgpVariant::kNeutralViolating;
  throw ConfigError("unknown variant '" + text + "'");
}

struct CommonOptions {
  std::string dataset;
  std::string registry;
  double alpha = 0.05;
  std::string set_mode = "tight";
  double perf_eps = 0.0;
  bool empirical_arm_probs = false;
};

TrialDataset load(const CommonOptions& options) {
  LoadOptions load_options;
  load_options.empirical_arm_probs = options.empirical_arm_probs;
  load_options.warnings = &std::cerr;
  return load_dataset(options.dataset, options.registry, load_options);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string variant = "paper";
  std::string out_csv = "trial.csv";
  std::string out_registry = "registry.json";
  bool emit_latent = false;
};

int cmd_simulate(const SimulateOptions& options) {
  std::optional<std::uint64_t> seed = options.seed;
  if (!seed) seed = env_seed();
  if (!seed) {
    throw ConfigError(
        "simulate needs a seed (--seed or TRIAL_BOUNDS_SEED)");
  }
  const sim::DgpSpec dgp = sim::DgpSpec::make(parse_variant(options.variant));
  const sim::SimOutput out = sim::simulate_trial(options.n, *seed, dgp);

  write_records_csv(out.dataset, options.out_csv);
  write_registry_json(out.dataset, options.out_registry);
  if (options.emit_latent) {
    std::filesystem::path latent(options.out_csv);
    latent.replace_extension();
    latent += ".latent.csv";
    write_file_atomic(latent, sim::latent_csv_text(out));
  }

  std::cout << "wrote " << options.out_csv << " (" << out.dataset.size()
            << " records) and " << options.out_registry << "\n";
  for (std::size_t p = 0; p < out.dataset.policies().size(); ++p) {
    const PolicySpec& spec = out.dataset.policies()[p];
    std::cout << "arm " << spec.id << ": "
              << out.dataset.arm_count(static_cast<int>(p))
              << " records, accuracy "
              << report::format_number(
                     sim::true_accuracy(dgp.arms[p].action_by_x))
              << (spec.performance ? "" : " (control)") << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
  CommonOptions common;
  std::string policy;
  std::string estimator = "ipw";
  bool clamp = false;
};

int cmd_evaluate(const EvaluateOptions& options) {
  const TrialDataset dataset = load(options.common);
  const EvaluationPolicy pi_e =
      load_evaluation_policy(options.policy, dataset);
  const SetMode mode = parse_set_mode(options.common.set_mode);

  if (options.estimator == "plugin") {
    BoundsResult result =
        exact_bounds(dataset, pi_e, mode, options.common.perf_eps);
    if (result.lower > result.upper) {
      std::cerr << "warning: lower bound exceeds upper bound "
                   "(sampling noise)\n";
      if (options.clamp) {
        const double mid = 0.5 * (result.lower + result.upper);
        result.lower = result.upper = mid;
      }
    }
    std::cout << report::exact_bounds_json(pi_e.id, result,
                                           dataset.covariate_support());
    return 0;
  }

  BoundsReport bounds = estimate_bounds(dataset, pi_e, options.common.alpha,
                                        mode, options.common.perf_eps);
  if (bounds.lower > bounds.upper) {
    std::cerr << "warning: L_hat exceeds U_hat (sampling noise)\n";
    if (options.clamp) {
      const double mid = 0.5 * (bounds.lower + bounds.upper);
      bounds.lower = bounds.upper = mid;
    }
  }
  std::cout << report::bounds_report_json(bounds);
  return 0;
}

// ---------------------------------------------------------------------------

struct FalsifyOptionsCli {
  CommonOptions common;
  std::string method = "welch";
  std::optional<std::uint64_t> seed;
  int permutations = 10000;
};

int cmd_falsify(const FalsifyOptionsCli& options) {
  const TrialDataset dataset = load(options.common);
  FalsifyOptions fo;
  fo.method = options.method == "permutation" ? TestMethod::kPermutation
                                              : TestMethod::kWelchT;
  fo.seed = options.seed ? *options.seed : env_seed().value_or(0);
  fo.permutations = options.permutations;

  const std::vector<TestReport> reports =
      run_all_pairs(dataset, options.common.alpha, fo);
  std::cout << report::falsification_json(reports,
                                          dataset.covariate_support());
  for (const TestReport& r : reports) {
    if (r.status == TestStatus::kOk && r.rejected_adjusted) return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct DecomposeOptions {
  CommonOptions common;
  std::string policy;
};

int cmd_decompose(const DecomposeOptions& options) {
  const TrialDataset dataset = load(options.common);
  const EvaluationPolicy pi_e =
      load_evaluation_policy(options.policy, dataset);
  const SetMode mode = parse_set_mode(options.common.set_mode);
  const BoundsResult bounds =
      exact_bounds(dataset, pi_e, mode, options.common.perf_eps);
  const DecompositionReport decomposition =
      decompose_gap(dataset, pi_e, mode, options.common.perf_eps);
  std::cout << report::decomposition_json(pi_e.id, bounds, decomposition,
                                          dataset.covariate_support());
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportOptions {
  CommonOptions common;
  std::vector<std::string> policies;
  std::string estimator = "ipw";
  std::string output = "json";
  std::string out = "-";
  std::string svg;
};

int cmd_report(const ReportOptions& options) {
  const TrialDataset dataset = load(options.common);
  const SetMode mode = parse_set_mode(options.common.set_mode);

  std::vector<report::PolicyRow> rows;
  for (const std::string& path : options.policies) {
    const EvaluationPolicy pi_e = load_evaluation_policy(path, dataset);
    report::PolicyRow row;
    row.id = pi_e.id;
    row.accuracy = pi_e.performance;
    if (options.estimator == "plugin") {
      const BoundsResult r =
          exact_bounds(dataset, pi_e, mode, options.common.perf_eps);
      row.lower = r.lower;
      row.upper = r.upper;
      row.ci_low = r.lower;
      row.ci_high = r.upper;
    } else {
      const BoundsReport r =
          estimate_bounds(dataset, pi_e, options.common.alpha, mode,
                          options.common.perf_eps);
      row.lower = r.lower;
      row.upper = r.upper;
      row.ci_low = r.ci_low;
      row.ci_high = r.ci_high;
    }
    // arm mean where the policy's action map matches a trialed arm
    for (std::size_t p = 0; p < dataset.policies().size(); ++p) {
      const PolicySpec& spec = dataset.policies()[p];
      if (spec.action_by_x == pi_e.action_by_x &&
          dataset.arm_count(static_cast<int>(p)) >= 2) {
        row.arm_mean =
            trialed_arm_value(dataset, spec.id, options.common.alpha).mean;
        break;
      }
    }
    rows.push_back(std::move(row));
  }

  emit(options.output == "csv" ? report::report_csv(rows)
                               : report::report_json(rows),
       options.out);
  if (!options.svg.empty()) {
    write_file_atomic(options.svg, report::report_svg(rows));
  }
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& common, bool with_alpha = true) {
  cmd->add_option("--dataset", common.dataset, "Trial records CSV")
      ->required();
  cmd->add_option("--registry", common.registry, "Policy registry JSON")
      ->required();
  if (with_alpha) {
    cmd->add_option("--alpha", common.alpha, "Significance level");
  }
  cmd->add_option("--set-mode", common.set_mode,
                  "Conditioning sets: tight (next-worst/best tie sets) or "
                  "relaxed (all worse/better performers)")
      ->check(CLI::IsMember({"tight", "relaxed"}));
  cmd->add_option("--perf-eps", common.perf_eps,
                  "Treat performances within eps as equal");
  cmd->add_flag("--empirical-arm-probs", common.empirical_arm_probs,
                "Recompute arm probabilities from the data (with a warning)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bounds, estimates and assumption checks for the value of untrialed "
      "decision policies, from randomized-trial logs"};
  app.require_subcommand(1);

  SimulateOptions simulate_options;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic three-arm trial");
  simulate->add_option("--n", simulate_options.n, "Number of records")
      ->required();
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      simulate->add_option("--seed", seed_value, "Master seed");
  simulate->add_option("--variant", simulate_options.variant,
                       "Outcome model variant")
      ->check(CLI::IsMember({"paper", "anti-monotone", "neutral-violating"}));
  simulate->add_option("--out-csv", simulate_options.out_csv,
                       "Records CSV path");
  simulate->add_option("--out-registry", simulate_options.out_registry,
                       "Registry JSON path");
  simulate->add_flag("--emit-latent", simulate_options.emit_latent,
                     "Also write the latent onset diagnostics CSV");

  EvaluateOptions evaluate_options;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Bound the value of an evaluation policy");
  add_common(evaluate, evaluate_options.common);
  evaluate->add_option("--policy", evaluate_options.policy,
                       "Evaluation policy JSON")
      ->required();
  evaluate->add_option("--estimator", evaluate_options.estimator,
                       "ipw (IPW estimates with CI) or plugin (per-cell "
                       "plug-in bounds)")
      ->check(CLI::IsMember({"ipw", "plugin"}));
  evaluate->add_flag("--clamp", evaluate_options.clamp,
                     "Replace an inverted bound pair by its midpoint");

  FalsifyOptionsCli falsify_options;
  CLI::App* falsify = app.add_subcommand(
      "falsify", "Run the assumption falsification tests on every arm pair");
  add_common(falsify, falsify_options.common);
  falsify->add_option("--method", falsify_options.method, "Test method")
      ->check(CLI::IsMember({"welch", "permutation"}));
  std::uint64_t falsify_seed = 0;
  CLI::Option* falsify_seed_opt =
      falsify->add_option("--seed", falsify_seed, "Permutation seed");
  falsify->add_option("--permutations", falsify_options.permutations,
                      "Permutation resamples")
      ->check(CLI::PositiveNumber);

  DecomposeOptions decompose_options;
  CLI::App* decompose = app.add_subcommand(
      "decompose", "Attribute the bound gap to its per-covariate components");
  add_common(decompose, decompose_options.common, /*with_alpha=*/false);
  decompose->add_option("--policy", decompose_options.policy,
                        "Evaluation policy JSON")
      ->required();

  ReportOptions report_options;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Per-policy comparison table (accuracy vs outcome bounds)");
  add_common(report_cmd, report_options.common);
  report_cmd->add_option("--policies", report_options.policies,
                         "Evaluation policy JSON files");
  report_cmd->add_option("--estimator", report_options.estimator, "Estimator")
      ->check(CLI::IsMember({"ipw", "plugin"}));
  report_cmd->add_option("--output", report_options.output, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  report_cmd->add_option("--out", report_options.out,
                         "Output path ('-' for stdout)");
  report_cmd->add_option("--svg", report_options.svg,
                         "Also render a static SVG bar chart to this path");

  try {
    app.parse(argc, argv);
    if (seed_opt->count() > 0) simulate_options.seed = seed_value;
    if (falsify_seed_opt->count() > 0) falsify_options.seed = falsify_seed;

    if (simulate->parsed()) return cmd_simulate(simulate_options);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_options);
    if (falsify->parsed()) return cmd_falsify(falsify_options);
    if (decompose->parsed()) return cmd_decompose(decompose_options);
    if (report_cmd->parsed()) return cmd_report(report_options);
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const trialbounds::Error& e) {
    std::cerr << trialbounds::report::error_json(e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << trialbounds::report::error_json(e.what());
    return 2;
  }
}
