#include "trialbounds/report.hpp"

#include <cmath>
#include <cstdio>

namespace trialbounds::report {

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Insertion-ordered JSON writer with the fixed number format.
class JsonWriter {
 public:
  JsonWriter& begin_object() {
    value_prefix();
    out_ += '{';
    first_.push_back(true);
    return *this;
  }
  JsonWriter& end_object() {
    out_ += '}';
    first_.pop_back();
    return *this;
  }
  JsonWriter& begin_array() {
    value_prefix();
    out_ += '[';
    first_.push_back(true);
    return *this;
  }
  JsonWriter& end_array() {
    out_ += ']';
    first_.pop_back();
    return *this;
  }
  JsonWriter& key(const std::string& name) {
    comma_if_needed();
    out_ += '"';
    out_ += json_escape(name);
    out_ += "\":";
    pending_key_ = true;
    return *this;
  }
  JsonWriter& number(double v) {
    value_prefix();
    out_ += format_number(v);
    return *this;
  }
  JsonWriter& integer(long long v) {
    value_prefix();
    out_ += std::to_string(v);
    return *this;
  }
  JsonWriter& string(const std::string& v) {
    value_prefix();
    out_ += '"';
    out_ += json_escape(v);
    out_ += '"';
    return *this;
  }
  JsonWriter& boolean(bool v) {
    value_prefix();
    out_ += v ? "true" : "false";
    return *this;
  }
  JsonWriter& null() {
    value_prefix();
    out_ += "null";
    return *this;
  }
  std::string take() { return std::move(out_); }

 private:
  void comma_if_needed() {
    if (first_.back()) {
      first_.back() = false;
    } else {
      out_ += ',';
    }
  }
  void value_prefix() {
    if (pending_key_) {
      pending_key_ = false;
    } else {
      comma_if_needed();
    }
  }

  std::string out_;
  std::vector<bool> first_{true};
  bool pending_key_ = false;
};

void write_cell(JsonWriter& w, const CellBounds& cell,
                const std::vector<std::string>& support) {
  w.begin_object();
  w.key("x").string(support[static_cast<std::size_t>(cell.x)]);
  w.key("lower").number(cell.lower);
  w.key("upper").number(cell.upper);
  w.key("lower_source").string(to_string(cell.lower_source));
  w.key("upper_source").string(to_string(cell.upper_source));
  w.key("delta_component").string(to_string(cell.component));
  w.key("delta").number(cell.delta);
  if (cell.lower_fallback || cell.upper_fallback) {
    w.key("fallback").boolean(true);
  }
  w.end_object();
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string bounds_report_json(const BoundsReport& report) {
  JsonWriter w;
  w.begin_object();
  w.key("policy").string(report.policy_id);
  w.key("L_hat").number(report.lower);
  w.key("U_hat").number(report.upper);
  w.key("sd_L").number(report.sd_lower);
  w.key("sd_U").number(report.sd_upper);
  w.key("n").integer(static_cast<long long>(report.n));
  w.key("alpha").number(report.alpha);
  w.key("ci").begin_array().number(report.ci_low).number(report.ci_high)
      .end_array();
  w.end_object();
  return w.take() + "\n";
}

std::string exact_bounds_json(const std::string& policy_id,
                              const BoundsResult& result,
                              const std::vector<std::string>& support) {
  JsonWriter w;
  w.begin_object();
  w.key("policy").string(policy_id);
  w.key("L").number(result.lower);
  w.key("U").number(result.upper);
  w.key("cells").begin_array();
  for (const CellBounds& cell : result.cells) write_cell(w, cell, support);
  w.end_array();
  w.end_object();
  return w.take() + "\n";
}

std::string decomposition_json(const std::string& policy_id,
                               const BoundsResult& result,
                               const DecompositionReport& decomposition,
                               const std::vector<std::string>& support) {
  JsonWriter w;
  w.begin_object();
  w.key("policy").string(policy_id);
  w.key("L").number(result.lower);
  w.key("U").number(result.upper);
  w.key("total_gap").number(decomposition.total_gap);
  w.key("cells").begin_array();
  for (const CellBounds& cell : decomposition.cells) {
    write_cell(w, cell, support);
  }
  w.end_array();
  w.end_object();
  return w.take() + "\n";
}

std::string falsification_json(std::span<const TestReport> reports,
                               const std::vector<std::string>& support) {
  JsonWriter w;
  w.begin_array();
  for (const TestReport& report : reports) {
    w.begin_object();
    w.key("assumption").string(to_string(report.assumption));
    w.key("low_policy").string(report.low_policy_id);
    w.key("high_policy").string(report.high_policy_id);
    w.key("method").string(to_string(report.method));
    w.key("alpha").number(report.alpha);
    w.key("status").string(to_string(report.status));
    if (report.status == TestStatus::kSkipped) {
      w.key("skip_reason").string(report.skip_reason);
      w.end_object();
      continue;
    }
    w.key("region").begin_array();
    for (int x : report.region) {
      w.string(support[static_cast<std::size_t>(x)]);
    }
    w.end_array();
    w.key("n_low").integer(static_cast<long long>(report.n_low));
    w.key("n_high").integer(static_cast<long long>(report.n_high));
    w.key("mean_low").number(report.mean_low);
    w.key("mean_high").number(report.mean_high);
    w.key("statistic").number(report.statistic);
    w.key("p_value").number(report.p_value);
    w.key("p_adjusted").number(report.p_adjusted);
    w.key("rejected").boolean(report.rejected);
    w.key("rejected_adjusted").boolean(report.rejected_adjusted);
    w.end_object();
  }
  w.end_array();
  return w.take() + "\n";
}

std::string report_csv(std::span<const PolicyRow> rows) {
  std::string out = "policy,accuracy,L_hat,U_hat,ci_low,ci_high,arm_mean\n";
  for (const PolicyRow& row : rows) {
    out += row.id;
    out += ',' + format_number(row.accuracy);
    out += ',' + format_number(row.lower);
    out += ',' + format_number(row.upper);
    out += ',' + format_number(row.ci_low);
    out += ',' + format_number(row.ci_high);
    out += ',';
    if (row.arm_mean) out += format_number(*row.arm_mean);
    out += '\n';
  }
  return out;
}

std::string report_json(std::span<const PolicyRow> rows) {
  JsonWriter w;
  w.begin_array();
  for (const PolicyRow& row : rows) {
    w.begin_object();
    w.key("policy").string(row.id);
    w.key("accuracy").number(row.accuracy);
    w.key("L_hat").number(row.lower);
    w.key("U_hat").number(row.upper);
    w.key("ci").begin_array().number(row.ci_low).number(row.ci_high)
        .end_array();
    if (row.arm_mean) {
      w.key("arm_mean").number(*row.arm_mean);
    } else {
      w.key("arm_mean").null();
    }
    w.end_object();
  }
  w.end_array();
  return w.take() + "\n";
}

std::string report_svg(std::span<const PolicyRow> rows) {
  // Minimal static rendering: per policy, an accuracy bar on a [0, 1] scale
  // next to the estimated outcome interval (box for [L_hat, U_hat], whisker
  // for the confidence interval).
  constexpr double kWidth = 640.0;
  constexpr double kHeight = 360.0;
  constexpr double kTop = 24.0;
  constexpr double kBottom = 40.0;
  constexpr double kLeft = 48.0;
  const double plot_h = kHeight - kTop - kBottom;
  const double group_w =
      rows.empty() ? 0.0 : (kWidth - kLeft - 16.0) / static_cast<double>(rows.size());

  auto y_of = [&](double v) { return kTop + (1.0 - v) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_number(kWidth) + "\" height=\"" + format_number(kHeight) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = 0.25 * tick;
    svg += "<line x1=\"" + format_number(kLeft) + "\" y1=\"" +
           format_number(y_of(v)) + "\" x2=\"" + format_number(kWidth - 16.0) +
           "\" y2=\"" + format_number(y_of(v)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"4\" y=\"" + format_number(y_of(v) + 4.0) +
           "\" font-size=\"11\">" + format_number(v) + "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PolicyRow& row = rows[i];
    const double x0 = kLeft + group_w * static_cast<double>(i);
    const double bar_w = group_w * 0.28;
    const double acc_x = x0 + group_w * 0.12;
    const double val_x = x0 + group_w * 0.55;
    svg += "<rect x=\"" + format_number(acc_x) + "\" y=\"" +
           format_number(y_of(row.accuracy)) + "\" width=\"" +
           format_number(bar_w) + "\" height=\"" +
           format_number(y_of(0.0) - y_of(row.accuracy)) +
           "\" fill=\"#9aa7b1\"/>\n";
    svg += "<line x1=\"" + format_number(val_x + bar_w / 2.0) + "\" y1=\"" +
           format_number(y_of(row.ci_low)) + "\" x2=\"" +
           format_number(val_x + bar_w / 2.0) + "\" y2=\"" +
           format_number(y_of(row.ci_high)) +
           "\" stroke=\"#2c6fbb\" stroke-width=\"2\"/>\n";
    svg += "<rect x=\"" + format_number(val_x) + "\" y=\"" +
           format_number(y_of(row.upper)) + "\" width=\"" +
           format_number(bar_w) + "\" height=\"" +
           format_number(y_of(row.lower) - y_of(row.upper)) +
           "\" fill=\"#2c6fbb\" fill-opacity=\"0.45\"/>\n";
    if (row.arm_mean) {
      svg += "<line x1=\"" + format_number(val_x - 3.0) + "\" y1=\"" +
             format_number(y_of(*row.arm_mean)) + "\" x2=\"" +
             format_number(val_x + bar_w + 3.0) + "\" y2=\"" +
             format_number(y_of(*row.arm_mean)) +
             "\" stroke=\"#444444\" stroke-width=\"2\"/>\n";
    }
    svg += "<text x=\"" + format_number(x0 + group_w * 0.5) + "\" y=\"" +
           format_number(kHeight - 20.0) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + json_escape(row.id) +
           "</text>\n";
  }
  svg += "<text x=\"" + format_number(kLeft) +
         "\" y=\"14\" font-size=\"11\">accuracy (grey) / outcome bounds "
         "(blue)</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string error_json(const std::string& message) {
  JsonWriter w;
  w.begin_object();
  w.key("error").string(message);
  w.end_object();
  return w.take() + "\n";
}

}  // namespace trialbounds::report
