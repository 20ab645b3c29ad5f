#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "trialbounds/dataset.hpp"
#include "trialbounds/policy_sets.hpp"

namespace trialbounds {

struct LoadOptions {
  // Recompute arm probabilities from empirical arm frequencies instead of
  // trusting the registry's design values. Emits a warning on `warnings`.
  bool empirical_arm_probs = false;
  std::ostream* warnings = nullptr;
};

// Loads and validates a trial dataset from a records CSV (exact header
// `unit_id,cluster,policy_id,x,a,y`) and a registry JSON document.
TrialDataset load_dataset(const std::filesystem::path& records_csv,
                          const std::filesystem::path& registry_json,
                          const LoadOptions& options = {});
TrialDataset load_dataset(std::istream& records_csv,
                          const std::string& registry_json,
                          const LoadOptions& options = {});

// Loads a standalone evaluation policy (same JSON object shape as a registry
// policy entry, with a required performance) resolved against the dataset's
// covariate support and action space.
EvaluationPolicy load_evaluation_policy(const std::filesystem::path& file,
                                        const TrialDataset& dataset);
EvaluationPolicy parse_evaluation_policy(const std::string& json_text,
                                         const TrialDataset& dataset);

// Serialization. Floating point values use shortest round-trip formatting,
// so write-then-load reproduces the dataset bit-exactly.
std::string records_csv_text(const TrialDataset& dataset);
std::string registry_json_text(const TrialDataset& dataset);
void write_records_csv(const TrialDataset& dataset,
                       const std::filesystem::path& path);
void write_registry_json(const TrialDataset& dataset,
                         const std::filesystem::path& path);

// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace trialbounds
