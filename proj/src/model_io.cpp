#include "tmc/model_io.hpp"

#include <json.hpp>

#include "tmc/errors.hpp"
#include "tmc/matrix.hpp"

namespace tmc {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json node_json(const Tree& tree, int index) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(index)];
  if (nd.feature < 0) return ordered_json{{"value", nd.value}};
  ordered_json j;
  j["feature"] = nd.feature;
  j["threshold"] = nd.threshold;
  j["left"] = node_json(tree, nd.left);
  j["right"] = node_json(tree, nd.right);
  return j;
}

int node_from(const json& j, Tree& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("value")) {
    tree.nodes[static_cast<std::size_t>(index)].value = j.at("value").get<double>();
    return index;
  }
  tree.nodes[static_cast<std::size_t>(index)].feature = j.at("feature").get<int>();
  tree.nodes[static_cast<std::size_t>(index)].threshold = j.at("threshold").get<double>();
  const int left = node_from(j.at("left"), tree);
  tree.nodes[static_cast<std::size_t>(index)].left = left;
  const int right = node_from(j.at("right"), tree);
  tree.nodes[static_cast<std::size_t>(index)].right = right;
  return index;
}

ordered_json ensemble_json(const AdaBoostEnsemble& ens, std::size_t n_features) {
  ordered_json j;
  j["loss"] = loss_name(ens.loss);
  j["degenerate"] = ens.degenerate;
  j["log_weights"] = ens.stage_log_weights;
  ordered_json trees = ordered_json::array();
  for (const auto& t : ens.trees) trees.push_back(node_json(t, 0));
  j["trees"] = std::move(trees);
  (void)n_features;
  return j;
}

AdaBoostEnsemble ensemble_from(const json& j, std::size_t n_features) {
  AdaBoostEnsemble ens;
  ens.loss = loss_from_string(j.at("loss").get<std::string>());
  ens.degenerate = j.at("degenerate").get<bool>();
  ens.stage_log_weights = j.at("log_weights").get<std::vector<double>>();
  for (const auto& tj : j.at("trees")) {
    Tree tree;
    tree.n_features = n_features;
    node_from(tj, tree);
    ens.trees.push_back(std::move(tree));
  }
  if (ens.trees.size() != ens.stage_log_weights.size())
    throw DataError("model: tree/weight count mismatch");
  return ens;
}

ordered_json tra_json(const TrAModel& model, std::size_t n_features) {
  ordered_json j;
  j["n_source"] = model.n_source;
  j["n_target"] = model.n_target;
  j["chosen_stage"] = model.chosen_stage;
  j["stage_errors"] = model.stage_errors;
  ordered_json stages = ordered_json::array();
  for (const auto& s : model.stage_models) stages.push_back(ensemble_json(s, n_features));
  j["stages"] = std::move(stages);
  return j;
}

TrAModel tra_from(const json& j, std::size_t n_features) {
  TrAModel model;
  model.n_source = j.at("n_source").get<std::size_t>();
  model.n_target = j.at("n_target").get<std::size_t>();
  model.chosen_stage = j.at("chosen_stage").get<std::size_t>();
  model.stage_errors = j.at("stage_errors").get<std::vector<double>>();
  for (const auto& sj : j.at("stages")) model.stage_models.push_back(ensemble_from(sj, n_features));
  if (model.stage_models.empty()) throw DataError("model: no stages");
  if (model.chosen_stage >= model.stage_models.size())
    throw DataError("model: chosen_stage out of range");
  return model;
}

ordered_json plan_json(const TransferPlan& plan, std::size_t n_features) {
  ordered_json j;
  j["target_intersection"] = plan.target_intersection;
  ordered_json ranking = ordered_json::array();
  for (const auto& [id, score] : plan.match.ranking)
    ranking.push_back(ordered_json{{"source", id}, {"score", score}});
  j["match"] = {{"target", plan.match.target_id},
                {"chosen", plan.match.chosen()},
                {"ranking", std::move(ranking)}};
  j["substitute_indices"] = plan.substitute_indices;
  j["substitution_threshold"] = plan.substitution_threshold;
  ordered_json models;
  for (std::size_t m = 0; m < 3; ++m)
    models[kMovementNames[m]] = tra_json(plan.models[m], n_features);
  j["models"] = std::move(models);
  return j;
}

TransferPlan plan_from(const json& j, std::size_t n_features) {
  TransferPlan plan;
  plan.target_intersection = j.at("target_intersection").get<std::string>();
  plan.match.target_id = j.at("match").at("target").get<std::string>();
  for (const auto& r : j.at("match").at("ranking"))
    plan.match.ranking.emplace_back(r.at("source").get<std::string>(),
                                    r.at("score").get<double>());
  if (plan.match.ranking.empty()) throw DataError("model: empty match ranking");
  plan.substitute_indices = j.at("substitute_indices").get<std::vector<std::size_t>>();
  plan.substitution_threshold = j.at("substitution_threshold").get<double>();
  for (std::size_t m = 0; m < 3; ++m)
    plan.models[m] = tra_from(j.at("models").at(kMovementNames[m]), n_features);
  return plan;
}

}  // namespace

std::string plan_bundle_to_json(const PlanBundle& bundle, const std::string& config_echo_json) {
  ordered_json envelope;
  envelope["format_version"] = kModelFormatVersion;
  envelope["created_by"] = std::string("tmc ") + kToolVersion;
  try {
    envelope["config"] = config_echo_json.empty() ? json::object() : json::parse(config_echo_json);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config echo is not valid JSON: ") + e.what());
  }
  ordered_json payload;
  payload["selected_variables"] = bundle.selected_variables;
  payload["selected_indices"] = bundle.selected_indices;
  ordered_json plans = ordered_json::array();
  for (const auto& p : bundle.plans) plans.push_back(plan_json(p, bundle.selected_indices.size()));
  payload["plans"] = std::move(plans);
  envelope["payload"] = std::move(payload);
  return envelope.dump(2) + "\n";
}

PlanBundle plan_bundle_from_json(const std::string& text) {
  json envelope;
  try {
    envelope = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file parse error: ") + e.what());
  }
  try {
    const int version = envelope.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("unsupported model format_version " + std::to_string(version) +
                      " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    const auto& payload = envelope.at("payload");
    PlanBundle bundle;
    bundle.selected_variables = payload.at("selected_variables").get<std::vector<std::string>>();
    bundle.selected_indices = payload.at("selected_indices").get<std::vector<int>>();
    if (bundle.selected_variables.size() != bundle.selected_indices.size())
      throw DataError("model: selected variable/index size mismatch");
    for (std::size_t i = 0; i < bundle.selected_variables.size(); ++i) {
      if (variable_index(bundle.selected_variables[i]) != bundle.selected_indices[i])
        throw DataError("model: selected variable '" + bundle.selected_variables[i] +
                        "' does not map to index " + std::to_string(bundle.selected_indices[i]));
    }
    for (const auto& pj : payload.at("plans"))
      bundle.plans.push_back(plan_from(pj, bundle.selected_indices.size()));
    return bundle;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file schema error: ") + e.what());
  }
}

void save_plan_bundle(const PlanBundle& bundle, const std::string& config_echo_json,
                      const std::string& path) {
  write_text_file(path, plan_bundle_to_json(bundle, config_echo_json));
}

PlanBundle load_plan_bundle(const std::string& path) {
  return plan_bundle_from_json(read_text_file(path));
}

std::vector<PredictionRow> predict_with_bundle(const PlanBundle& bundle, const Dataset& target) {
  if (target.empty()) throw UsageError("predict: empty target dataset");
  std::vector<PredictionRow> rows(target.size());
  const Matrix tx = features_matrix(target, bundle.selected_indices);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto& inst = target.instances[i];
    const TransferPlan* plan = nullptr;
    for (const auto& p : bundle.plans)
      if (p.target_intersection == inst.intersection_id) { plan = &p; break; }
    if (plan == nullptr)
      throw DataError("predict: no plan for intersection '" + inst.intersection_id + "'");
    PredictionRow& row = rows[i];
    row.intersection_id = inst.intersection_id;
    row.approach_id = inst.approach_id;
    row.day_index = inst.day_index;
    row.interval_index = inst.interval_index;
    row.v_lm_hat = plan->models[0].predict(tx.row(i));
    row.v_tm_hat = plan->models[1].predict(tx.row(i));
    row.v_rm_hat = plan->models[2].predict(tx.row(i));
  }
  return rows;
}

PlanBundle bundle_from_result(const PipelineResult& result) {
  PlanBundle bundle;
  bundle.selected_variables = result.selection.selected_union;
  bundle.selected_indices = result.selection.selected_indices;
  bundle.plans = result.plans;
  return bundle;
}

}  // namespace tmc
