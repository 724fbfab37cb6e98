#include <doctest.h>

#include <cstring>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "tmc/tmc.h"

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("tmc_capi_" + std::to_string(::getpid()) + "_" + std::to_string(counter()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int counter() {
    static int n = 0;
    return n++;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

constexpr const char* kSmallConfig = R"({
  "datagen": {"intersections": 3, "days": 1, "targets": 1,
               "shift": {"demand_scale": 1.3, "profile_rotation": 1}},
  "lasso": {"grid_size": 8, "folds": 3},
  "boosting": {"steps": 3, "folds": 2, "iterations": 4, "tree": {"max_depth": 3}},
  "eval": {"models": ["KNN", "Forest"], "forest_trees": 10}
})";

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::strlen(tmc_version()) > 0);
  CHECK(tmc_dataset_size(nullptr) == -1);

  tmc_dataset* ds = nullptr;
  CHECK(tmc_dataset_read_csv("/nonexistent/file.csv", 0, &ds) == TMC_ERR_DATA);
  CHECK(std::strlen(tmc_last_error()) > 0);
}

TEST_CASE("generate, read, select, match, run, predict round trip") {
  const TempDir dir;
  const std::string data_csv = dir.file("data.csv");
  const std::string params_json = dir.file("params.json");
  const std::string target_csv = dir.file("target.csv");

  REQUIRE(tmc_generate(kSmallConfig, data_csv.c_str(), params_json.c_str(),
                       target_csv.c_str()) == TMC_OK);
  CHECK(std::filesystem::exists(data_csv));
  CHECK(std::filesystem::exists(params_json));
  CHECK(std::filesystem::exists(target_csv));

  tmc_dataset* source = nullptr;
  REQUIRE(tmc_dataset_read_csv(data_csv.c_str(), 0, &source) == TMC_OK);
  CHECK(tmc_dataset_size(source) == 3 * 4 * 16);

  char* summary = nullptr;
  REQUIRE(tmc_dataset_summary(source, &summary) == TMC_OK);
  CHECK(std::string(summary).find("I00") != std::string::npos);
  tmc_string_free(summary);

  tmc_dataset* target = nullptr;
  REQUIRE(tmc_dataset_read_csv(target_csv.c_str(), 1, &target) == TMC_OK);

  // select
  const std::string coef = dir.file("coefficients.csv");
  const std::string selected = dir.file("selected.json");
  char* select_summary = nullptr;
  REQUIRE(tmc_select(source, kSmallConfig, coef.c_str(), selected.c_str(), &select_summary) ==
          TMC_OK);
  tmc_string_free(select_summary);
  const std::string table = slurp(coef);
  CHECK(table.rfind("variable,left_turn,through,right_turn\n", 0) == 0);

  // match
  char* match_json = nullptr;
  REQUIRE(tmc_match(source, target, kSmallConfig, &match_json) == TMC_OK);
  CHECK(std::string(match_json).find("\"target\": \"T00\"") != std::string::npos);
  tmc_string_free(match_json);

  // run
  const std::string predictions = dir.file("predictions.csv");
  const std::string plan_path = dir.file("plan.json");
  char* run_summary = nullptr;
  REQUIRE(tmc_run(source, target, kSmallConfig, predictions.c_str(), plan_path.c_str(),
                  &run_summary) == TMC_OK);
  tmc_string_free(run_summary);
  CHECK(std::filesystem::exists(predictions));

  // reload the plan and check bit-identical predictions
  tmc_plan* plan = nullptr;
  REQUIRE(tmc_plan_load(plan_path.c_str(), &plan) == TMC_OK);
  const std::string repredicted = dir.file("repredicted.csv");
  char* predict_summary = nullptr;
  REQUIRE(tmc_plan_predict(plan, target, repredicted.c_str(), &predict_summary) == TMC_OK);
  tmc_string_free(predict_summary);
  CHECK(slurp(repredicted) == slurp(predictions));

  tmc_plan_free(plan);
  tmc_dataset_free(source);
  tmc_dataset_free(target);
}

TEST_CASE("evaluate writes the report files") {
  const TempDir dir;
  const std::string data_csv = dir.file("data.csv");
  const std::string params_json = dir.file("params.json");
  REQUIRE(tmc_generate(R"({"datagen": {"intersections": 3, "days": 1}})", data_csv.c_str(),
                       params_json.c_str(), nullptr) == TMC_OK);
  tmc_dataset* data = nullptr;
  REQUIRE(tmc_dataset_read_csv(data_csv.c_str(), 0, &data) == TMC_OK);

  const std::string out_dir = dir.file("eval");
  char* summary = nullptr;
  REQUIRE(tmc_evaluate(data,
                       R"({"lasso": {"grid_size": 6, "folds": 3},
                           "boosting": {"steps": 2, "folds": 2, "iterations": 3},
                           "eval": {"models": ["KNN", "Forest"], "forest_trees": 8}})",
                       out_dir.c_str(), &summary) == TMC_OK);
  tmc_string_free(summary);
  CHECK(std::filesystem::exists(out_dir + "/mae.csv"));
  CHECK(std::filesystem::exists(out_dir + "/rmse.csv"));
  CHECK(std::filesystem::exists(out_dir + "/report.json"));
  const std::string mae_csv = slurp(out_dir + "/mae.csv");
  CHECK(mae_csv.find("KNN,") != std::string::npos);
  CHECK(mae_csv.find("Forest,") != std::string::npos);
  tmc_dataset_free(data);
}

TEST_CASE("status codes map the error taxonomy") {
  // usage: bad config key
  CHECK(tmc_generate(R"({"bogus": 1})", "/tmp/x.csv", "/tmp/x.json", nullptr) == TMC_ERR_USAGE);
  // usage: NULL outputs
  CHECK(tmc_generate("", nullptr, nullptr, nullptr) == TMC_ERR_USAGE);

  // data: malformed CSV
  const TempDir dir;
  const std::string bad_csv = dir.file("bad.csv");
  std::ofstream(bad_csv) << "not,a,real,header\n";
  tmc_dataset* ds = nullptr;
  CHECK(tmc_dataset_read_csv(bad_csv.c_str(), 0, &ds) == TMC_ERR_DATA);

  // data: truncated plan file
  const std::string bad_plan = dir.file("plan.json");
  std::ofstream(bad_plan) << "{\"format_version\": 1, \"payload\": ";
  tmc_plan* plan = nullptr;
  CHECK(tmc_plan_load(bad_plan.c_str(), &plan) == TMC_ERR_DATA);
}

TEST_CASE("unlabeled rows are rejected unless permitted") {
  const TempDir dir;
  const std::string data_csv = dir.file("data.csv");
  const std::string params_json = dir.file("params.json");
  const std::string target_csv = dir.file("target.csv");
  REQUIRE(tmc_generate(kSmallConfig, data_csv.c_str(), params_json.c_str(),
                       target_csv.c_str()) == TMC_OK);

  // blank out the last three cells (v_lm, v_tm, v_rm) of every data row
  std::string text = slurp(target_csv);
  std::string unlabeled;
  bool header = true;
  for (std::size_t start = 0; start < text.size();) {
    const std::size_t end = text.find('\n', start);
    std::string line = text.substr(start, end - start);
    if (!header) {
      std::size_t pos = line.size();
      for (int k = 0; k < 3; ++k) pos = line.find_last_of(',', pos - 1);
      line = line.substr(0, pos + 1) + ",,";
    }
    header = false;
    unlabeled += line + "\n";
    start = end + 1;
  }
  const std::string unlabeled_csv = dir.file("unlabeled.csv");
  std::ofstream(unlabeled_csv) << unlabeled;

  tmc_dataset* strict = nullptr;
  CHECK(tmc_dataset_read_csv(unlabeled_csv.c_str(), 0, &strict) == TMC_ERR_DATA);
  tmc_dataset* relaxed = nullptr;
  CHECK(tmc_dataset_read_csv(unlabeled_csv.c_str(), 1, &relaxed) == TMC_OK);
  tmc_dataset_free(relaxed);
}
