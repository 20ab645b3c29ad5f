#include "trialbounds/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "trialbounds/errors.hpp"

namespace trialbounds {

namespace {

using nlohmann::ordered_json;

constexpr const char* kRecordsHeader = "unit_id,cluster,policy_id,x,a,y";

std::string format_roundtrip(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) {
    throw IoError("failed to format floating point value");
  }
  return std::string(buf, ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Codes may appear as JSON strings or integers; canonicalize to strings.
std::string code_to_string(const ordered_json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) {
    return std::to_string(j.get<long long>());
  }
  if (j.is_number_unsigned()) {
    return std::to_string(j.get<unsigned long long>());
  }
  throw SchemaError(where + ": codes must be strings or integers");
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_outcome(const std::string& text, std::size_t row) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw SchemaError("record " + std::to_string(row) +
                      ": cannot parse outcome '" + text + "'");
  }
  return value;
}

struct ParsedRegistry {
  std::vector<std::string> covariate_support;
  std::vector<std::string> action_space;
  std::optional<int> neutral_action;
  double y_min = 0.0;
  double y_max = 1.0;
  std::vector<PolicySpec> policies;
};

ParsedRegistry extract_registry(const ordered_json& doc);

ParsedRegistry parse_registry(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw SchemaError(std::string("registry JSON parse error: ") + e.what());
  }
  for (const char* key :
       {"y_min", "y_max", "neutral_action", "covariate_support",
        "action_space", "policies"}) {
    if (!doc.contains(key)) {
      throw SchemaError(std::string("registry: missing key '") + key + "'");
    }
  }

  try {
    return extract_registry(doc);
  } catch (const ordered_json::exception& e) {
    throw SchemaError(std::string("registry: ") + e.what());
  }
}

ParsedRegistry extract_registry(const ordered_json& doc) {
  ParsedRegistry reg;
  reg.y_min = doc.at("y_min").get<double>();
  reg.y_max = doc.at("y_max").get<double>();
  for (const auto& code : doc.at("covariate_support")) {
    reg.covariate_support.push_back(code_to_string(code, "covariate_support"));
  }
  for (const auto& code : doc.at("action_space")) {
    reg.action_space.push_back(code_to_string(code, "action_space"));
  }

  auto covariate_index = [&reg](const std::string& code) {
    for (std::size_t i = 0; i < reg.covariate_support.size(); ++i) {
      if (reg.covariate_support[i] == code) return static_cast<int>(i);
    }
    return -1;
  };
  auto action_index = [&reg](const std::string& code) {
    for (std::size_t i = 0; i < reg.action_space.size(); ++i) {
      if (reg.action_space[i] == code) return static_cast<int>(i);
    }
    return -1;
  };

  if (!doc.at("neutral_action").is_null()) {
    const std::string code =
        code_to_string(doc.at("neutral_action"), "neutral_action");
    const int idx = action_index(code);
    if (idx < 0) {
      throw SchemaError("neutral_action '" + code +
                        "' is not in the action space");
    }
    reg.neutral_action = idx;
  }

  for (const auto& entry : doc.at("policies")) {
    PolicySpec spec;
    if (!entry.contains("id") || !entry.contains("arm_prob") ||
        !entry.contains("action_map") || !entry.contains("performance")) {
      throw SchemaError(
          "registry policy entries need id, performance, arm_prob and "
          "action_map");
    }
    spec.id = entry.at("id").get<std::string>();
    if (!entry.at("performance").is_null()) {
      spec.performance = entry.at("performance").get<double>();
    }
    spec.arm_prob = entry.at("arm_prob").get<double>();

    const auto& map = entry.at("action_map");
    if (!map.is_object()) {
      throw SchemaError("policy " + spec.id + ": action_map must be an object");
    }
    spec.action_by_x.assign(reg.covariate_support.size(), -1);
    std::optional<int> default_action;
    for (const auto& [key, value] : map.items()) {
      const std::string action_code = code_to_string(value, "action_map");
      const int a = action_index(action_code);
      if (a < 0) {
        throw RegistryError("policy " + spec.id + ": action '" + action_code +
                            "' is not in the action space");
      }
      if (key == "default") {
        default_action = a;
        continue;
      }
      const int x = covariate_index(key);
      if (x < 0) {
        throw RegistryError("policy " + spec.id + ": action_map key '" + key +
                            "' is not in the covariate support");
      }
      spec.action_by_x[static_cast<std::size_t>(x)] = a;
    }
    for (std::size_t x = 0; x < spec.action_by_x.size(); ++x) {
      if (spec.action_by_x[x] >= 0) continue;
      if (!default_action) {
        throw RegistryError("policy " + spec.id +
                            ": action_map does not cover x = '" +
                            reg.covariate_support[x] + "'");
      }
      spec.action_by_x[x] = *default_action;
    }
    reg.policies.push_back(std::move(spec));
  }
  return reg;
}

}  // namespace

TrialDataset load_dataset(std::istream& records_csv,
                          const std::string& registry_json,
                          const LoadOptions& options) {
  ParsedRegistry reg = parse_registry(registry_json);

  std::unordered_map<std::string, int> policy_by_id;
  for (std::size_t p = 0; p < reg.policies.size(); ++p) {
    policy_by_id.emplace(reg.policies[p].id, static_cast<int>(p));
  }
  std::unordered_map<std::string, int> covariate_by_code;
  for (std::size_t i = 0; i < reg.covariate_support.size(); ++i) {
    covariate_by_code.emplace(reg.covariate_support[i], static_cast<int>(i));
  }
  std::unordered_map<std::string, int> action_by_code;
  for (std::size_t i = 0; i < reg.action_space.size(); ++i) {
    action_by_code.emplace(reg.action_space[i], static_cast<int>(i));
  }

  std::vector<TrialRecord> records;
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(records_csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header_seen) {
      if (line != kRecordsHeader) {
        throw SchemaError("records CSV header must be exactly '" +
                          std::string(kRecordsHeader) + "', got '" + line +
                          "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != 6) {
      throw SchemaError("record " + std::to_string(row) + ": expected 6 " +
                        "columns, got " + std::to_string(fields.size()));
    }
    TrialRecord rec;
    rec.unit_id = fields[0];
    rec.cluster = fields[1];
    auto pit = policy_by_id.find(fields[2]);
    if (pit == policy_by_id.end()) {
      throw RegistryError("record " + std::to_string(row) +
                          ": unknown policy_id '" + fields[2] + "'");
    }
    rec.policy = pit->second;
    auto xit = covariate_by_code.find(fields[3]);
    if (xit == covariate_by_code.end()) {
      throw ConsistencyError("record " + std::to_string(row) +
                             ": covariate '" + fields[3] +
                             "' is not in the declared support");
    }
    rec.x = xit->second;
    auto ait = action_by_code.find(fields[4]);
    if (ait == action_by_code.end()) {
      throw ConsistencyError("record " + std::to_string(row) + ": action '" +
                             fields[4] + "' is not in the declared space");
    }
    rec.action = ait->second;
    rec.outcome = parse_outcome(fields[5], row);
    records.push_back(std::move(rec));
    ++row;
  }
  if (!header_seen) {
    throw SchemaError("records CSV is empty (missing header)");
  }

  if (options.empirical_arm_probs) {
    if (records.empty()) {
      throw ConfigError(
          "cannot recompute arm probabilities from an empty dataset");
    }
    std::vector<std::size_t> counts(reg.policies.size(), 0);
    for (const TrialRecord& r : records) {
      counts[static_cast<std::size_t>(r.policy)] += 1;
    }
    for (std::size_t p = 0; p < reg.policies.size(); ++p) {
      if (counts[p] == 0) {
        throw RegistryError("policy " + reg.policies[p].id +
                            " has no records; empirical arm probability "
                            "would be zero");
      }
      reg.policies[p].arm_prob =
          static_cast<double>(counts[p]) / static_cast<double>(records.size());
    }
    if (options.warnings) {
      *options.warnings << "warning: arm probabilities recomputed from "
                           "empirical frequencies, overriding the registry\n";
    }
  }

  return TrialDataset::create(std::move(reg.covariate_support),
                              std::move(reg.action_space), reg.neutral_action,
                              reg.y_min, reg.y_max, std::move(reg.policies),
                              std::move(records));
}

TrialDataset load_dataset(const std::filesystem::path& records_csv,
                          const std::filesystem::path& registry_json,
                          const LoadOptions& options) {
  std::ifstream records(records_csv, std::ios::binary);
  if (!records) {
    throw IoError("cannot open " + records_csv.string());
  }
  return load_dataset(records, read_file(registry_json), options);
}

namespace {
EvaluationPolicy extract_evaluation_policy(const ordered_json& doc,
                                           const TrialDataset& dataset);
}  // namespace

EvaluationPolicy parse_evaluation_policy(const std::string& json_text,
                                         const TrialDataset& dataset) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw SchemaError(std::string("policy JSON parse error: ") + e.what());
  }
  if (!doc.contains("id") || !doc.contains("performance") ||
      !doc.contains("action_map")) {
    throw SchemaError(
        "evaluation policy needs id, performance and action_map");
  }
  try {
    return extract_evaluation_policy(doc, dataset);
  } catch (const nlohmann::ordered_json::exception& e) {
    throw SchemaError(std::string("evaluation policy: ") + e.what());
  }
}

namespace {

EvaluationPolicy extract_evaluation_policy(const ordered_json& doc,
                                           const TrialDataset& dataset) {
  EvaluationPolicy pi_e;
  pi_e.id = doc.at("id").get<std::string>();
  if (doc.at("performance").is_null()) {
    throw SchemaError("evaluation policy " + pi_e.id +
                      ": performance must be a finite number");
  }
  pi_e.performance = doc.at("performance").get<double>();
  if (!std::isfinite(pi_e.performance)) {
    throw SchemaError("evaluation policy " + pi_e.id +
                      ": performance must be finite");
  }

  pi_e.action_by_x.assign(dataset.covariate_support().size(), -1);
  std::optional<int> default_action;
  for (const auto& [key, value] : doc.at("action_map").items()) {
    const std::string action_code = code_to_string(value, "action_map");
    const int a = dataset.action_index(action_code);
    if (a < 0) {
      throw SchemaError("evaluation policy " + pi_e.id + ": action '" +
                        action_code + "' is not in the action space");
    }
    if (key == "default") {
      default_action = a;
      continue;
    }
    const int x = dataset.covariate_index(key);
    if (x < 0) {
      throw SchemaError("evaluation policy " + pi_e.id +
                        ": action_map key '" + key +
                        "' is not in the covariate support");
    }
    pi_e.action_by_x[static_cast<std::size_t>(x)] = a;
  }
  for (std::size_t x = 0; x < pi_e.action_by_x.size(); ++x) {
    if (pi_e.action_by_x[x] >= 0) continue;
    if (!default_action) {
      throw SchemaError("evaluation policy " + pi_e.id +
                        ": action_map does not cover x = '" +
                        dataset.covariate_support()[x] + "'");
    }
    pi_e.action_by_x[x] = *default_action;
  }
  return pi_e;
}

}  // namespace

EvaluationPolicy load_evaluation_policy(const std::filesystem::path& file,
                                        const TrialDataset& dataset) {
  return parse_evaluation_policy(read_file(file), dataset);
}

std::string records_csv_text(const TrialDataset& dataset) {
  std::string out = kRecordsHeader;
  out.push_back('\n');
  for (const TrialRecord& r : dataset.records()) {
    out += r.unit_id;
    out.push_back(',');
    out += r.cluster;
    out.push_back(',');
    out += dataset.policies()[static_cast<std::size_t>(r.policy)].id;
    out.push_back(',');
    out += dataset.covariate_support()[static_cast<std::size_t>(r.x)];
    out.push_back(',');
    out += dataset.action_space()[static_cast<std::size_t>(r.action)];
    out.push_back(',');
    out += format_roundtrip(r.outcome);
    out.push_back('\n');
  }
  return out;
}

std::string registry_json_text(const TrialDataset& dataset) {
  ordered_json doc;
  doc["y_min"] = dataset.y_min();
  doc["y_max"] = dataset.y_max();
  if (dataset.neutral_action()) {
    doc["neutral_action"] =
        dataset.action_space()[static_cast<std::size_t>(*dataset.neutral_action())];
  } else {
    doc["neutral_action"] = nullptr;
  }
  doc["covariate_support"] = dataset.covariate_support();
  doc["action_space"] = dataset.action_space();
  doc["policies"] = ordered_json::array();
  for (const PolicySpec& spec : dataset.policies()) {
    ordered_json entry;
    entry["id"] = spec.id;
    if (spec.performance) {
      entry["performance"] = *spec.performance;
    } else {
      entry["performance"] = nullptr;
    }
    entry["arm_prob"] = spec.arm_prob;
    ordered_json map = ordered_json::object();
    for (std::size_t x = 0; x < spec.action_by_x.size(); ++x) {
      map[dataset.covariate_support()[x]] =
          dataset.action_space()[static_cast<std::size_t>(spec.action_by_x[x])];
    }
    entry["action_map"] = std::move(map);
    doc["policies"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out << content;
    if (!out) {
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("failed to rename " + tmp.string() + " to " + path.string());
  }
}

void write_records_csv(const TrialDataset& dataset,
                       const std::filesystem::path& path) {
  write_file_atomic(path, records_csv_text(dataset));
}

void write_registry_json(const TrialDataset& dataset,
                         const std::filesystem::path& path) {
  write_file_atomic(path, registry_json_text(dataset));
}

}  // namespace trialbounds
