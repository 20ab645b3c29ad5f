#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trialbounds/bounds.hpp"
#include "trialbounds/estimator.hpp"
#include "trialbounds/falsification.hpp"

namespace trialbounds::report {

// Fixed 12-significant-digit formatting for every number in a report, so
// byte-identical output does not depend on platform float printing.
std::string format_number(double v);

std::string bounds_report_json(const BoundsReport& report);

std::string exact_bounds_json(const std::string& policy_id,
                              const BoundsResult& result,
                              const std::vector<std::string>& support);

std::string decomposition_json(const std::string& policy_id,
                               const BoundsResult& result,
                               const DecompositionReport& decomposition,
                               const std::vector<std::string>& support);

std::string falsification_json(std::span<const TestReport> reports,
                               const std::vector<std::string>& support);

// One row per evaluated policy for the model-comparison report (the data
// behind a performance-vs-outcome bar chart).
struct PolicyRow {
  std::string id;
  double accuracy = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<double> arm_mean;  // present when the policy was trialed
};

std::string report_csv(std::span<const PolicyRow> rows);
std::string report_json(std::span<const PolicyRow> rows);
std::string report_svg(std::span<const PolicyRow> rows);

std::string error_json(const std::string& message);

}  // namespace trialbounds::report
