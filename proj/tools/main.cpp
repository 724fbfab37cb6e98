// tmc command-line tool. Everything goes through the C API in tmc/tmc.h;
// this file only parses arguments, assembles the config JSON and prints
// summaries. Data outputs always go to files, stdout carries human-readable
// notes only, diagnostics go to stderr (TMC_LOG controls verbosity).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmc/tmc.h"

namespace {

using nlohmann::json;

int status_to_exit(tmc_status status) {
  switch (status) {
    case TMC_OK: return 0;
    case TMC_ERR_USAGE: return 1;
    case TMC_ERR_DATA: return 2;
    case TMC_ERR_NUMERIC: return 3;
  }
  return 2;
}

int fail(tmc_status status) {
  std::fprintf(stderr, "tmc: error: %s\n", tmc_last_error());
  return status_to_exit(status);
}

// Overlay merge: objects merge by key, everything else replaces.
json merge(const json& base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) return overlay;
  json out = base;
  for (const auto& [key, value] : overlay.items())
    out[key] = out.contains(key) ? merge(out.at(key), value) : value;
  return out;
}

struct DatasetHandle {
  tmc_dataset* ptr = nullptr;
  ~DatasetHandle() { tmc_dataset_free(ptr); }
};

struct PlanHandle {
  tmc_plan* ptr = nullptr;
  ~PlanHandle() { tmc_plan_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { tmc_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tmc — turning-movement-count estimation toolkit (libtmc " +
               std::string(tmc_version()) + ")"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_help_all_flag("--help-all", "print help for every subcommand");

  std::string config_path;
  long long seed = -1;
  long long jobs = -1;
  app.add_option("--config", config_path, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "seed for all randomness");
  app.add_option("--jobs", jobs, "worker threads (0 = all processors)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic network");
  std::string gen_out;
  long long gen_intersections = -1, gen_days = -1, gen_approaches = -1, gen_targets = -1;
  double gen_noise = -1.0;
  std::string gen_feature_mode;
  double shift_demand = -1.0, shift_jitter = -1.0, shift_lane_prob = -1.0;
  long long shift_rotation = 0;
  bool shift_rotation_set = false;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--intersections", gen_intersections, "number of intersections");
  gen->add_option("--days", gen_days, "days per intersection");
  gen->add_option("--approaches", gen_approaches, "approaches per intersection (3 or 4)");
  gen->add_option("--noise-scale", gen_noise, "lognormal noise scale");
  gen->add_option("--feature-mode", gen_feature_mode, "full | minimal");
  gen->add_option("--targets", gen_targets, "shifted target intersections to emit");
  gen->add_option("--shift-demand", shift_demand, "target demand multiplier");
  gen->add_option("--shift-rotation", shift_rotation, "target profile rotation (bins)")
      ->each([&](const std::string&) { shift_rotation_set = true; });
  gen->add_option("--shift-jitter", shift_jitter, "target turn-fraction jitter");
  gen->add_option("--shift-lane-prob", shift_lane_prob, "target lane reconfiguration probability");

  // select
  auto* select = app.add_subcommand("select", "Lasso feature selection");
  std::string select_data, select_out;
  select->add_option("--data", select_data, "labeled dataset CSV")->required();
  select->add_option("--out", select_out, "output directory")->required();

  // match
  auto* match = app.add_subcommand("match", "similar-intersection matching");
  std::string match_source, match_target, match_out;
  match->add_option("--source", match_source, "labeled source CSV")->required();
  match->add_option("--target", match_target, "target CSV (labels optional)")->required();
  match->add_option("--out", match_out, "output JSON file")->required();

  // run
  auto* run = app.add_subcommand("run", "train transfer models and predict");
  std::string run_source, run_target, run_out;
  run->add_option("--source", run_source, "labeled source CSV")->required();
  run->add_option("--target", run_target, "target CSV (labels optional)")->required();
  run->add_option("--out", run_out, "output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "leave-one-intersection-out benchmark");
  std::string eval_data, eval_out;
  evaluate->add_option("--data", eval_data, "labeled dataset CSV")->required();
  evaluate->add_option("--out", eval_out, "output directory")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "apply a saved plan to new target data");
  std::string predict_plan, predict_target, predict_out;
  predict->add_option("--plan", predict_plan, "plan JSON from `run`")->required();
  predict->add_option("--target", predict_target, "target CSV (labels optional)")->required();
  predict->add_option("--out", predict_out, "output predictions CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints usage/help text
    return rc == 0 ? 0 : 1;     // anything but --help/--version is a usage error
  }

  // config precedence: defaults < --config file < explicit flags
  json cfg = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      cfg = json::parse(buf.str());
    } catch (const json::exception& e) {
      std::fprintf(stderr, "tmc: error: cannot parse %s: %s\n", config_path.c_str(), e.what());
      return 1;
    }
  }
  json flags = json::object();
  if (seed >= 0) flags["seed"] = seed;
  if (jobs >= 0) flags["jobs"] = jobs;
  if (gen_intersections >= 0) flags["datagen"]["intersections"] = gen_intersections;
  if (gen_days >= 0) flags["datagen"]["days"] = gen_days;
  if (gen_approaches >= 0) flags["datagen"]["approaches"] = gen_approaches;
  if (gen_noise >= 0.0) flags["datagen"]["noise_scale"] = gen_noise;
  if (!gen_feature_mode.empty()) flags["datagen"]["feature_mode"] = gen_feature_mode;
  if (gen_targets >= 0) flags["datagen"]["targets"] = gen_targets;
  if (shift_demand >= 0.0) flags["datagen"]["shift"]["demand_scale"] = shift_demand;
  if (shift_rotation_set) flags["datagen"]["shift"]["profile_rotation"] = shift_rotation;
  if (shift_jitter >= 0.0) flags["datagen"]["shift"]["turn_fraction_jitter"] = shift_jitter;
  if (shift_lane_prob >= 0.0) flags["datagen"]["shift"]["lane_reconfig_prob"] = shift_lane_prob;
  const std::string config = merge(cfg, flags).dump();

  if (gen->parsed()) {
    std::filesystem::create_directories(gen_out);
    const std::string data_csv = gen_out + "/data.csv";
    const std::string params = gen_out + "/params.json";
    const std::string target_csv = gen_out + "/target.csv";
    std::filesystem::remove(target_csv);
    const tmc_status st =
        tmc_generate(config.c_str(), data_csv.c_str(), params.c_str(), target_csv.c_str());
    if (st != TMC_OK) return fail(st);
    std::printf("wrote %s and %s\n", data_csv.c_str(), params.c_str());
    if (std::filesystem::exists(target_csv)) std::printf("wrote %s\n", target_csv.c_str());
    return 0;
  }

  if (select->parsed()) {
    DatasetHandle data;
    tmc_status st = tmc_dataset_read_csv(select_data.c_str(), 0, &data.ptr);
    if (st != TMC_OK) return fail(st);
    std::filesystem::create_directories(select_out);
    const std::string coef = select_out + "/coefficients.csv";
    const std::string selected = select_out + "/selected.json";
    OwnedString summary;
    st = tmc_select(data.ptr, config.c_str(), coef.c_str(), selected.c_str(), &summary.ptr);
    if (st != TMC_OK) return fail(st);
    const json s = json::parse(summary.str());
    std::printf("selected %zu of 24 variables; wrote %s and %s\n",
                s.at("selected").size(), coef.c_str(), selected.c_str());
    return 0;
  }

  if (match->parsed()) {
    DatasetHandle source, target;
    tmc_status st = tmc_dataset_read_csv(match_source.c_str(), 0, &source.ptr);
    if (st != TMC_OK) return fail(st);
    st = tmc_dataset_read_csv(match_target.c_str(), 1, &target.ptr);
    if (st != TMC_OK) return fail(st);
    OwnedString result;
    st = tmc_match(source.ptr, target.ptr, config.c_str(), &result.ptr);
    if (st != TMC_OK) return fail(st);
    std::ofstream out(match_out, std::ios::binary | std::ios::trunc);
    out << result.str();
    if (!out) {
      std::fprintf(stderr, "tmc: error: cannot write %s\n", match_out.c_str());
      return 2;
    }
    for (const auto& m : json::parse(result.str()).at("matches"))
      std::printf("%s -> %s\n", m.at("target").get<std::string>().c_str(),
                  m.at("chosen").get<std::string>().c_str());
    std::printf("wrote %s\n", match_out.c_str());
    return 0;
  }

  if (run->parsed()) {
    DatasetHandle source, target;
    tmc_status st = tmc_dataset_read_csv(run_source.c_str(), 0, &source.ptr);
    if (st != TMC_OK) return fail(st);
    st = tmc_dataset_read_csv(run_target.c_str(), 1, &target.ptr);
    if (st != TMC_OK) return fail(st);
    std::filesystem::create_directories(run_out);
    const std::string predictions = run_out + "/predictions.csv";
    const std::string plan = run_out + "/plan.json";
    OwnedString summary;
    st = tmc_run(source.ptr, target.ptr, config.c_str(), predictions.c_str(), plan.c_str(),
                 &summary.ptr);
    if (st != TMC_OK) return fail(st);
    const json s = json::parse(summary.str());
    for (const auto& p : s.at("plans"))
      std::printf("%s matched to %s (substituted %zu rows)\n",
                  p.at("target").get<std::string>().c_str(),
                  p.at("matched_source").get<std::string>().c_str(),
                  p.at("substituted").get<std::size_t>());
    std::printf("wrote %s and %s\n", predictions.c_str(), plan.c_str());
    return 0;
  }

  if (evaluate->parsed()) {
    DatasetHandle data;
    tmc_status st = tmc_dataset_read_csv(eval_data.c_str(), 0, &data.ptr);
    if (st != TMC_OK) return fail(st);
    OwnedString summary;
    st = tmc_evaluate(data.ptr, config.c_str(), eval_out.c_str(), &summary.ptr);
    if (st != TMC_OK) return fail(st);
    const json s = json::parse(summary.str());
    std::printf("%-12s %10s %10s %10s\n", "model", "left", "through", "right");
    for (const auto& [model, cells] : s.at("summary").items())
      std::printf("%-12s %10.3f %10.3f %10.3f  (mae)\n", model.c_str(),
                  cells.at("mae").at("left").get<double>(),
                  cells.at("mae").at("through").get<double>(),
                  cells.at("mae").at("right").get<double>());
    if (s.at("failures").get<std::size_t>() > 0)
      std::printf("%zu fold failures; see report.json\n", s.at("failures").get<std::size_t>());
    std::printf("wrote %s/mae.csv, %s/rmse.csv, %s/report.json\n", eval_out.c_str(),
                eval_out.c_str(), eval_out.c_str());
    return 0;
  }

  if (predict->parsed()) {
    PlanHandle plan;
    tmc_status st = tmc_plan_load(predict_plan.c_str(), &plan.ptr);
    if (st != TMC_OK) return fail(st);
    DatasetHandle target;
    st = tmc_dataset_read_csv(predict_target.c_str(), 1, &target.ptr);
    if (st != TMC_OK) return fail(st);
    OwnedString summary;
    st = tmc_plan_predict(plan.ptr, target.ptr, predict_out.c_str(), &summary.ptr);
    if (st != TMC_OK) return fail(st);
    std::printf("wrote %s (%zu rows)\n", predict_out.c_str(),
                json::parse(summary.str()).at("predictions").get<std::size_t>());
    return 0;
  }

  return 1;
}
