#include "tmc/config.hpp"

#include <json.hpp>

#include "tmc/errors.hpp"
#include "tmc/parallel.hpp"

namespace tmc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw UsageError("config: '" + path + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) { known = true; break; }
    if (!known) throw UsageError("config: unknown key '" + path + key + "'");
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: bad value for '" + path + key + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  datagen.validate();
  if (gen_targets < 0) throw UsageError("datagen.targets must be >= 0");
  gen_shift.validate();
  lasso.validate();
  boosting.validate();
  if (!(substitution_fraction > 0.0) || substitution_fraction > 1.0)
    throw UsageError("matching.substitution_fraction must be in (0,1]");
  eval.validate();
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig pc;
  pc.lasso = lasso;
  pc.boosting = boosting;
  pc.substitution_fraction = substitution_fraction;
  pc.seed = seed;
  pc.jobs = effective_jobs();
  return pc;
}

LoioConfig RunConfig::loio_config() const {
  LoioConfig lc;
  lc.lasso = lasso;
  lc.boosting = boosting;
  lc.substitution_fraction = substitution_fraction;
  lc.eval = eval;
  lc.seed = seed;
  lc.jobs = effective_jobs();
  return lc;
}

std::size_t RunConfig::effective_jobs() const { return jobs == 0 ? default_jobs() : jobs; }

RunConfig run_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config JSON parse error: ") + e.what());
  }

  RunConfig cfg;
  reject_unknown(j, "", {"seed", "jobs", "datagen", "lasso", "boosting", "matching", "eval"});
  read_into(j, "seed", cfg.seed, "");
  read_into(j, "jobs", cfg.jobs, "");

  if (j.contains("datagen")) {
    const auto& d = j.at("datagen");
    reject_unknown(d, "datagen.",
                   {"intersections", "days", "approaches", "noise_scale", "feature_mode",
                    "targets", "shift"});
    read_into(d, "intersections", cfg.datagen.n_intersections, "datagen.");
    read_into(d, "days", cfg.datagen.n_days, "datagen.");
    read_into(d, "approaches", cfg.datagen.n_approaches, "datagen.");
    read_into(d, "noise_scale", cfg.datagen.noise_scale, "datagen.");
    if (d.contains("feature_mode"))
      cfg.datagen.feature_mode = feature_mode_from_string(d.at("feature_mode").get<std::string>());
    read_into(d, "targets", cfg.gen_targets, "datagen.");
    if (d.contains("shift")) {
      const auto& s = d.at("shift");
      reject_unknown(s, "datagen.shift.",
                     {"demand_scale", "profile_rotation", "turn_fraction_jitter",
                      "lane_reconfig_prob"});
      read_into(s, "demand_scale", cfg.gen_shift.demand_scale, "datagen.shift.");
      read_into(s, "profile_rotation", cfg.gen_shift.profile_rotation, "datagen.shift.");
      read_into(s, "turn_fraction_jitter", cfg.gen_shift.turn_fraction_jitter, "datagen.shift.");
      read_into(s, "lane_reconfig_prob", cfg.gen_shift.lane_reconfig_prob, "datagen.shift.");
    }
  }

  if (j.contains("lasso")) {
    const auto& l = j.at("lasso");
    reject_unknown(l, "lasso.", {"grid_size", "folds", "tolerance", "max_iter"});
    read_into(l, "grid_size", cfg.lasso.grid_size, "lasso.");
    read_into(l, "folds", cfg.lasso.folds, "lasso.");
    read_into(l, "tolerance", cfg.lasso.tolerance, "lasso.");
    read_into(l, "max_iter", cfg.lasso.max_iter, "lasso.");
  }

  if (j.contains("boosting")) {
    const auto& b = j.at("boosting");
    reject_unknown(b, "boosting.", {"steps", "folds", "iterations", "loss", "tree"});
    read_into(b, "steps", cfg.boosting.steps, "boosting.");
    read_into(b, "folds", cfg.boosting.folds, "boosting.");
    read_into(b, "iterations", cfg.boosting.iterations, "boosting.");
    if (b.contains("loss")) cfg.boosting.loss = loss_from_string(b.at("loss").get<std::string>());
    if (b.contains("tree")) {
      const auto& t = b.at("tree");
      reject_unknown(t, "boosting.tree.",
                     {"max_depth", "min_samples_leaf", "min_weight_fraction_leaf"});
      read_into(t, "max_depth", cfg.boosting.tree.max_depth, "boosting.tree.");
      read_into(t, "min_samples_leaf", cfg.boosting.tree.min_samples_leaf, "boosting.tree.");
      read_into(t, "min_weight_fraction_leaf", cfg.boosting.tree.min_weight_fraction_leaf,
                "boosting.tree.");
    }
  }

  if (j.contains("matching")) {
    const auto& m = j.at("matching");
    reject_unknown(m, "matching.", {"substitution_fraction"});
    read_into(m, "substitution_fraction", cfg.substitution_fraction, "matching.");
  }

  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    reject_unknown(e, "eval.",
                   {"models", "knn_k", "knn_weighting", "forest_trees", "forest_feature_fraction"});
    read_into(e, "models", cfg.eval.models, "eval.");
    read_into(e, "knn_k", cfg.eval.knn_k, "eval.");
    if (e.contains("knn_weighting"))
      cfg.eval.knn_weighting = knn_weighting_from_string(e.at("knn_weighting").get<std::string>());
    read_into(e, "forest_trees", cfg.eval.forest_trees, "eval.");
    read_into(e, "forest_feature_fraction", cfg.eval.forest_feature_fraction, "eval.");
  }

  cfg.validate();
  return cfg;
}

std::string run_config_to_json(const RunConfig& config) {
  ordered_json j;
  j["seed"] = config.seed;
  j["jobs"] = config.jobs;
  j["datagen"] = {{"intersections", config.datagen.n_intersections},
                  {"days", config.datagen.n_days},
                  {"approaches", config.datagen.n_approaches},
                  {"noise_scale", config.datagen.noise_scale},
                  {"feature_mode", feature_mode_name(config.datagen.feature_mode)},
                  {"targets", config.gen_targets},
                  {"shift",
                   {{"demand_scale", config.gen_shift.demand_scale},
                    {"profile_rotation", config.gen_shift.profile_rotation},
                    {"turn_fraction_jitter", config.gen_shift.turn_fraction_jitter},
                    {"lane_reconfig_prob", config.gen_shift.lane_reconfig_prob}}}};
  j["lasso"] = {{"grid_size", config.lasso.grid_size},
                {"folds", config.lasso.folds},
                {"tolerance", config.lasso.tolerance},
                {"max_iter", config.lasso.max_iter}};
  j["boosting"] = {{"steps", config.boosting.steps},
                   {"folds", config.boosting.folds},
                   {"iterations", config.boosting.iterations},
                   {"loss", loss_name(config.boosting.loss)},
                   {"tree",
                    {{"max_depth", config.boosting.tree.max_depth},
                     {"min_samples_leaf", config.boosting.tree.min_samples_leaf},
                     {"min_weight_fraction_leaf", config.boosting.tree.min_weight_fraction_leaf}}}};
  j["matching"] = {{"substitution_fraction", config.substitution_fraction}};
  std::string weighting =
      config.eval.knn_weighting == KnnWeighting::kUniform ? "uniform" : "inverse_distance";
  j["eval"] = {{"models", config.eval.models},
               {"knn_k", config.eval.knn_k},
               {"knn_weighting", weighting},
               {"forest_trees", config.eval.forest_trees},
               {"forest_feature_fraction", config.eval.forest_feature_fraction}};
  return j.dump(2) + "\n";
}

namespace {

json merge_values(const json& base, const json& overlay) {
  if (!base.is_object() || !overlay.is_object()) return overlay;
  json out = base;
  for (const auto& [key, value] : overlay.items()) {
    if (out.contains(key)) {
      out[key] = merge_values(out.at(key), value);
    } else {
      out[key] = value;
    }
  }
  return out;
}

}  // namespace

std::string merge_config_json(const std::string& base_json, const std::string& overlay_json) {
  json base, overlay;
  try {
    base = base_json.empty() ? json::object() : json::parse(base_json);
    overlay = overlay_json.empty() ? json::object() : json::parse(overlay_json);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config JSON parse error: ") + e.what());
  }
  return merge_values(base, overlay).dump();
}

}  // namespace tmc
