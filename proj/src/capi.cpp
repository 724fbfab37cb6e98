#include "tmc/tmc.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "tmc/config.hpp"
#include "tmc/csv.hpp"
#include "tmc/datagen.hpp"
#include "tmc/errors.hpp"
#include "tmc/eval.hpp"
#include "tmc/model_io.hpp"
#include "tmc/pipeline.hpp"

struct tmc_dataset {
  tmc::Dataset data;
};

struct tmc_plan {
  tmc::PlanBundle bundle;
};

namespace {

thread_local std::string t_last_error;

char* owned_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** out, const std::string& s) {
  if (out != nullptr) *out = owned_string(s);
}

template <typename Fn>
tmc_status wrap(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return TMC_OK;
  } catch (const tmc::UsageError& e) {
    t_last_error = e.what();
    return TMC_ERR_USAGE;
  } catch (const tmc::NumericError& e) {
    t_last_error = e.what();
    return TMC_ERR_NUMERIC;
  } catch (const tmc::DataError& e) {
    t_last_error = e.what();
    return TMC_ERR_DATA;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return TMC_ERR_DATA;
  } catch (...) {
    t_last_error = "unknown failure";
    return TMC_ERR_DATA;
  }
}

tmc::RunConfig parse_config(const char* config_json) {
  return tmc::run_config_from_json(config_json == nullptr ? "" : config_json);
}

std::string config_echo(const char* config_json) {
  return tmc::run_config_to_json(parse_config(config_json));
}

void require(bool ok, const char* what) {
  if (!ok) throw tmc::UsageError(what);
}

}  // namespace

extern "C" {

const char* tmc_version(void) { return tmc::kToolVersion; }

const char* tmc_last_error(void) { return t_last_error.c_str(); }

void tmc_string_free(char* s) { std::free(s); }

tmc_status tmc_dataset_read_csv(const char* path, int allow_unlabeled, tmc_dataset** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "tmc_dataset_read_csv: NULL argument");
    auto handle = std::make_unique<tmc_dataset>();
    handle->data = tmc::read_dataset_csv(path, allow_unlabeled != 0);
    *out = handle.release();
  });
}

tmc_status tmc_dataset_write_csv(const tmc_dataset* dataset, const char* path) {
  return wrap([&] {
    require(dataset != nullptr && path != nullptr, "tmc_dataset_write_csv: NULL argument");
    tmc::write_dataset_csv(dataset->data, path);
  });
}

int64_t tmc_dataset_size(const tmc_dataset* dataset) {
  return dataset == nullptr ? -1 : static_cast<int64_t>(dataset->data.size());
}

tmc_status tmc_dataset_summary(const tmc_dataset* dataset, char** json_out) {
  return wrap([&] {
    require(dataset != nullptr && json_out != nullptr, "tmc_dataset_summary: NULL argument");
    nlohmann::ordered_json j;
    j["instances"] = dataset->data.size();
    j["intersections"] = dataset->data.intersection_ids();
    j["fully_labeled"] = dataset->data.fully_labeled();
    set_out(json_out, j.dump());
  });
}

void tmc_dataset_free(tmc_dataset* dataset) { delete dataset; }

tmc_status tmc_generate(const char* config_json, const char* out_csv,
                        const char* out_params_json, const char* out_target_csv) {
  return wrap([&] {
    require(out_csv != nullptr && out_params_json != nullptr,
            "tmc_generate: output paths are required");
    const tmc::RunConfig cfg = parse_config(config_json);
    tmc::GeneratedNetwork network = tmc::generate_network(cfg.datagen, cfg.seed);

    if (cfg.gen_targets > 0) {
      require(out_target_csv != nullptr,
              "tmc_generate: datagen.targets > 0 needs a target CSV path");
      tmc::Dataset targets;
      for (int t = 0; t < cfg.gen_targets; ++t) {
        char id[16];
        std::snprintf(id, sizeof(id), "T%02d", t);
        tmc::Rng prng(tmc::derive_seed(cfg.seed, 0x7A000000ULL + 2 * static_cast<std::uint64_t>(t)));
        tmc::IntersectionParams base = tmc::sample_intersection_params(prng, cfg.datagen);
        tmc::IntersectionParams shifted = tmc::apply_shift(
            base, cfg.gen_shift,
            tmc::derive_seed(cfg.seed, 0x7A100000ULL + static_cast<std::uint64_t>(t)));
        auto instances = tmc::generate_intersection(
            shifted, id, cfg.datagen.n_days, cfg.datagen.feature_mode,
            tmc::derive_seed(cfg.seed, 0x7A000000ULL + 2 * static_cast<std::uint64_t>(t) + 1));
        for (auto& inst : instances) targets.instances.push_back(std::move(inst));
        network.params.emplace_back(id, std::move(shifted));
      }
      tmc::write_dataset_csv(targets, out_target_csv);
    }

    tmc::write_dataset_csv(network.dataset, out_csv);
    tmc::write_text_file(out_params_json, tmc::params_json(network));
  });
}

tmc_status tmc_select(const tmc_dataset* source, const char* config_json,
                      const char* coefficients_csv, const char* selected_json,
                      char** summary_json) {
  return wrap([&] {
    require(source != nullptr, "tmc_select: NULL dataset");
    const tmc::RunConfig cfg = parse_config(config_json);
    const tmc::FeatureSelection selection =
        tmc::select_features(source->data, cfg.lasso, tmc::derive_seed(cfg.seed, 0x5e1));
    if (coefficients_csv != nullptr)
      tmc::write_text_file(coefficients_csv, selection.coefficient_table_csv());
    if (selected_json != nullptr) tmc::write_text_file(selected_json, selection.to_json());
    nlohmann::ordered_json j;
    j["selected"] = selection.selected_union;
    for (int m = 0; m < 3; ++m)
      j["lambda"][tmc::kMovementNames[static_cast<std::size_t>(m)]] =
          selection.models[static_cast<std::size_t>(m)].lambda;
    set_out(summary_json, j.dump());
  });
}

tmc_status tmc_match(const tmc_dataset* source, const tmc_dataset* target,
                     const char* config_json, char** result_json) {
  return wrap([&] {
    require(source != nullptr && target != nullptr && result_json != nullptr,
            "tmc_match: NULL argument");
    const tmc::RunConfig cfg = parse_config(config_json);
    const tmc::FeatureSelection selection =
        tmc::select_features(source->data, cfg.lasso, tmc::derive_seed(cfg.seed, 0x5e1));
    nlohmann::ordered_json matches = nlohmann::ordered_json::array();
    for (const auto& tid : target->data.intersection_ids()) {
      const tmc::MatchResult match = tmc::match_intersections(
          source->data, target->data, tid, selection.selected_indices);
      nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
      for (const auto& [id, score] : match.ranking)
        ranking.push_back({{"source", id}, {"score", score}});
      matches.push_back(
          {{"target", tid}, {"chosen", match.chosen()}, {"ranking", std::move(ranking)}});
    }
    nlohmann::ordered_json j;
    j["selected_variables"] = selection.selected_union;
    j["matches"] = std::move(matches);
    set_out(result_json, j.dump(2) + "\n");
  });
}

tmc_status tmc_run(const tmc_dataset* source, const tmc_dataset* target,
                   const char* config_json, const char* predictions_csv, const char* plan_json,
                   char** summary_json) {
  return wrap([&] {
    require(source != nullptr && target != nullptr, "tmc_run: NULL dataset");
    const tmc::RunConfig cfg = parse_config(config_json);
    const tmc::PipelineResult result =
        tmc::run_pipeline(source->data, target->data, cfg.pipeline_config());
    if (predictions_csv != nullptr) tmc::write_predictions_csv(result.predictions, predictions_csv);
    if (plan_json != nullptr)
      tmc::save_plan_bundle(tmc::bundle_from_result(result), config_echo(config_json), plan_json);
    nlohmann::ordered_json j;
    j["selected"] = result.selection.selected_union;
    nlohmann::ordered_json plans = nlohmann::ordered_json::array();
    for (const auto& plan : result.plans)
      plans.push_back({{"target", plan.target_intersection},
                       {"matched_source", plan.match.chosen()},
                       {"substituted", plan.substitute_indices.size()},
                       {"threshold", plan.substitution_threshold}});
    j["plans"] = std::move(plans);
    j["predictions"] = result.predictions.size();
    set_out(summary_json, j.dump());
  });
}

tmc_status tmc_plan_load(const char* path, tmc_plan** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "tmc_plan_load: NULL argument");
    auto handle = std::make_unique<tmc_plan>();
    handle->bundle = tmc::load_plan_bundle(path);
    *out = handle.release();
  });
}

tmc_status tmc_plan_predict(const tmc_plan* plan, const tmc_dataset* target,
                            const char* predictions_csv, char** summary_json) {
  return wrap([&] {
    require(plan != nullptr && target != nullptr && predictions_csv != nullptr,
            "tmc_plan_predict: NULL argument");
    const auto rows = tmc::predict_with_bundle(plan->bundle, target->data);
    tmc::write_predictions_csv(rows, predictions_csv);
    nlohmann::ordered_json j;
    j["predictions"] = rows.size();
    set_out(summary_json, j.dump());
  });
}

void tmc_plan_free(tmc_plan* plan) { delete plan; }

tmc_status tmc_evaluate(const tmc_dataset* dataset, const char* config_json, const char* out_dir,
                        char** summary_json) {
  return wrap([&] {
    require(dataset != nullptr && out_dir != nullptr, "tmc_evaluate: NULL argument");
    const tmc::RunConfig cfg = parse_config(config_json);
    const tmc::EvalReport report = tmc::loio_evaluate(dataset->data, cfg.loio_config());
    std::filesystem::create_directories(out_dir);
    const std::string dir(out_dir);
    tmc::write_text_file(dir + "/mae.csv", report.summary_csv("mae"));
    tmc::write_text_file(dir + "/rmse.csv", report.summary_csv("rmse"));
    tmc::write_text_file(dir + "/report.json", report.to_json());
    nlohmann::ordered_json j;
    j["models"] = report.models;
    j["intersections"] = dataset->data.intersection_ids().size();
    j["failures"] = report.failures.size();
    nlohmann::ordered_json table;
    for (const auto& model : report.models) {
      const auto it = report.summary.find(model);
      if (it == report.summary.end()) continue;
      table[model] = {{"mae",
                       {{"left", it->second[0].mae},
                        {"through", it->second[1].mae},
                        {"right", it->second[2].mae}}},
                      {"rmse",
                       {{"left", it->second[0].rmse},
                        {"through", it->second[1].rmse},
                        {"right", it->second[2].rmse}}}};
    }
    j["summary"] = std::move(table);
    set_out(summary_json, j.dump());
  });
}

}  // extern "C"
