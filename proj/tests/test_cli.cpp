#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* path = std::getenv("TRIAL_BOUNDS_CLI");
  REQUIRE(path != nullptr);
  return path;
}

fs::path work_dir() {
  const fs::path dir = fs::current_path() / "cli_work";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int run(const std::string& args, const std::string& stdout_file = "out.txt") {
  const fs::path dir = work_dir();
  std::string command = "cd " + dir.string() + " && " + cli_path() + " " +
                        args + " > " + stdout_file + " 2> err.txt";
  const int status = std::system(command.c_str());
  REQUIRE(status >= 0);
  return WEXITSTATUS(status);
}

std::string out_text(const std::string& name = "out.txt") {
  return read_file(work_dir() / name);
}

void write_policy_files() {
  std::ofstream(work_dir() / "pi_e0.json")
      << R"({"id": "pi_e0", "performance": 0.475,
             "action_map": {"0": "0", "default": "1"}})";
  std::ofstream(work_dir() / "pi_e1.json")
      << R"({"id": "pi_e1", "performance": 0.625,
             "action_map": {"0": "1", "1": "1", "default": "0"}})";
  std::ofstream(work_dir() / "pi1.json")
      << R"({"id": "pi1", "performance": 0.425,
             "action_map": {"1": "1", "default": "0"}})";
  std::ofstream(work_dir() / "broken.json") << "{ not json";
}

}  // namespace

TEST_CASE("simulate writes a loadable deterministic trial") {
  write_policy_files();
  CHECK(run("simulate --n 5000 --seed 7 --out-csv trial.csv "
            "--out-registry registry.json --emit-latent") == 0);
  const std::string summary = out_text();
  CHECK(summary.find("0.325") != std::string::npos);
  CHECK(summary.find("0.425") != std::string::npos);
  CHECK(summary.find("0.375") != std::string::npos);
  CHECK(read_file(work_dir() / "trial.csv")
            .rfind("unit_id,cluster,policy_id,x,a,y\n", 0) == 0);
  CHECK(read_file(work_dir() / "trial.latent.csv")
            .rfind("unit_id,onset\n", 0) == 0);

  CHECK(run("simulate --n 5000 --seed 7 --out-csv trial2.csv "
            "--out-registry registry2.json") == 0);
  CHECK(read_file(work_dir() / "trial.csv") ==
        read_file(work_dir() / "trial2.csv"));
}

TEST_CASE("simulate configuration failures exit with code 2") {
  CHECK(run("simulate --n 0 --seed 7") == 2);
  CHECK(run("simulate --seed 7") == 2);  // missing --n
  // no --seed flag and no env fallback
  std::string command = "cd " + work_dir().string() + " && env -u " +
                        "TRIAL_BOUNDS_SEED " + cli_path() +
                        " simulate --n 10 > out.txt 2> err.txt";
  CHECK(WEXITSTATUS(std::system(command.c_str())) == 2);
  // env fallback works
  command = "cd " + work_dir().string() + " && TRIAL_BOUNDS_SEED=9 " +
            cli_path() + " simulate --n 10 --out-csv env.csv "
            "--out-registry env.json > out.txt 2> err.txt";
  CHECK(WEXITSTATUS(std::system(command.c_str())) == 0);
}

TEST_CASE("evaluate emits the IPW report schema") {
  CHECK(run("evaluate --dataset trial.csv --registry registry.json "
            "--policy pi_e0.json --alpha 0.05",
            "eval.json") == 0);
  const json doc = json::parse(out_text("eval.json"));
  CHECK(doc.at("policy") == "pi_e0");
  CHECK(std::fabs(doc.at("L_hat").get<double>() - 0.711) < 0.05);
  CHECK(std::fabs(doc.at("U_hat").get<double>() - 0.865) < 0.05);
  CHECK(doc.at("n") == 5000);
  CHECK(doc.at("ci")[0].get<double>() < doc.at("L_hat").get<double>());
  CHECK(doc.at("ci")[1].get<double>() > doc.at("U_hat").get<double>());
}

TEST_CASE("evaluate with the plug-in estimator exposes cells") {
  CHECK(run("evaluate --dataset trial.csv --registry registry.json "
            "--policy pi_e0.json --estimator plugin",
            "plugin.json") == 0);
  const json doc = json::parse(out_text("plugin.json"));
  CHECK(std::fabs(doc.at("L").get<double>() - 0.711) < 0.05);
  REQUIRE(doc.at("cells").size() == 4);
  CHECK(doc.at("cells")[1].at("upper_source") == "y_max");
  CHECK(doc.at("cells")[0].at("delta_component") == "none");
}

TEST_CASE("evaluating a trialed arm collapses the interval") {
  CHECK(run("evaluate --dataset trial.csv --registry registry.json "
            "--policy pi1.json",
            "arm.json") == 0);
  const json doc = json::parse(out_text("arm.json"));
  CHECK(std::fabs(doc.at("L_hat").get<double>() -
                  doc.at("U_hat").get<double>()) < 1e-9);
}

TEST_CASE("relaxed mode contains the tight interval") {
  CHECK(run("evaluate --dataset trial.csv --registry registry.json "
            "--policy pi_e0.json --set-mode relaxed",
            "relaxed.json") == 0);
  const json relaxed = json::parse(out_text("relaxed.json"));
  const int code = run(
      "evaluate --dataset trial.csv --registry registry.json "
      "--policy pi_e0.json --set-mode tight",
      "tight.json");
  CHECK(code == 0);
  const json tight = json::parse(out_text("tight.json"));
  CHECK(relaxed.at("L_hat").get<double>() <=
        tight.at("L_hat").get<double>() + 1e-9);
  CHECK(relaxed.at("U_hat").get<double>() >=
        tight.at("U_hat").get<double>() - 1e-9);
}

TEST_CASE("evaluate failure modes exit with code 2") {
  CHECK(run("evaluate --dataset missing.csv --registry registry.json "
            "--policy pi_e0.json") == 2);
  CHECK(run("evaluate --dataset trial.csv --registry registry.json "
            "--policy broken.json") == 2);
  CHECK(run("evaluate --dataset trial.csv --registry registry.json") == 2);
  CHECK(run("no-such-command") == 2);
  const std::string err = read_file(work_dir() / "err.txt");
  CHECK(!err.empty());
}

TEST_CASE("falsify is calm on paper data and loud on violating data") {
  CHECK(run("falsify --dataset trial.csv --registry registry.json "
            "--alpha 0.05",
            "falsify.json") == 0);
  const json doc = json::parse(out_text("falsify.json"));
  CHECK(doc.size() == 6);  // 3 monotonicity entries (2 skipped) + 3 neutral
  int skipped = 0;
  for (const auto& entry : doc) {
    if (entry.at("status") == "skipped") ++skipped;
  }
  CHECK(skipped == 2);

  CHECK(run("simulate --n 5000 --seed 4 --variant anti-monotone "
            "--out-csv anti.csv --out-registry anti.json") == 0);
  CHECK(run("falsify --dataset anti.csv --registry anti.json") == 3);

  CHECK(run("simulate --n 5000 --seed 4 --variant neutral-violating "
            "--out-csv nv.csv --out-registry nv.json") == 0);
  CHECK(run("falsify --dataset nv.csv --registry nv.json") == 3);
}

TEST_CASE("decompose ties the gap to its components") {
  CHECK(run("decompose --dataset trial.csv --registry registry.json "
            "--policy pi_e0.json",
            "decompose.json") == 0);
  const json doc = json::parse(out_text("decompose.json"));
  const double gap =
      doc.at("U").get<double>() - doc.at("L").get<double>();
  CHECK(std::fabs(doc.at("total_gap").get<double>() - gap) < 1e-9);
  REQUIRE(doc.at("cells").size() == 4);
}

TEST_CASE("report emits figure data in both formats") {
  CHECK(run("report --dataset trial.csv --registry registry.json "
            "--policies pi_e0.json pi_e1.json pi1.json --output csv "
            "--out report.csv --svg figure.svg") == 0);
  const std::string csv = read_file(work_dir() / "report.csv");
  CHECK(csv.rfind("policy,accuracy,L_hat,U_hat,ci_low,ci_high,arm_mean\n",
                  0) == 0);
  CHECK(csv.find("pi_e0,0.475,") != std::string::npos);
  // pi1 matches a trialed arm, so its row carries an arm mean
  std::istringstream lines(csv);
  std::string line;
  bool pi1_has_mean = false;
  while (std::getline(lines, line)) {
    if (line.rfind("pi1,", 0) == 0) pi1_has_mean = line.back() != ',';
  }
  CHECK(pi1_has_mean);
  CHECK(read_file(work_dir() / "figure.svg").rfind("<svg", 0) == 0);

  CHECK(run("report --dataset trial.csv --registry registry.json "
            "--policies pi_e0.json pi_e1.json pi1.json --output json",
            "report.json") == 0);
  const json doc = json::parse(out_text("report.json"));
  REQUIRE(doc.size() == 3);
  CHECK(doc[0].at("policy") == "pi_e0");
  CHECK(doc[2].at("arm_mean").is_number());
  // same numbers under both serializations
  std::istringstream csv_lines(csv);
  std::getline(csv_lines, line);  // header
  std::getline(csv_lines, line);
  const double csv_l_hat = std::stod(line.substr(line.find(',', 6) + 1));
  CHECK(csv_l_hat == doctest::Approx(doc[0].at("L_hat").get<double>()));

  // empty policy list: header-only CSV
  CHECK(run("report --dataset trial.csv --registry registry.json "
            "--output csv",
            "empty.csv") == 0);
  CHECK(out_text("empty.csv") ==
        "policy,accuracy,L_hat,U_hat,ci_low,ci_high,arm_mean\n");
}

TEST_CASE("empirical arm probability override warns on stderr") {
  CHECK(run("evaluate --dataset trial.csv --registry registry.json "
            "--policy pi_e0.json --empirical-arm-probs",
            "empirical.json") == 0);
  const std::string err = read_file(work_dir() / "err.txt");
  CHECK(err.find("recomputed") != std::string::npos);
}
