#pragma once

#include <string>
#include <vector>

#include "tmc/csv.hpp"
#include "tmc/pipeline.hpp"

namespace tmc {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;

// Everything `predict` needs from a finished `run`: the selected predictor
// set and one trained plan per target intersection.
struct PlanBundle {
  std::vector<std::string> selected_variables;
  std::vector<int> selected_indices;
  std::vector<TransferPlan> plans;
};

// Versioned envelope {format_version, created_by, config, payload}; the
// contents are fully deterministic so identical runs write identical bytes.
std::string plan_bundle_to_json(const PlanBundle& bundle, const std::string& config_echo_json);
PlanBundle plan_bundle_from_json(const std::string& text);

void save_plan_bundle(const PlanBundle& bundle, const std::string& config_echo_json,
                      const std::string& path);
PlanBundle load_plan_bundle(const std::string& path);

// Applies the bundle's per-intersection models to every target row.
std::vector<PredictionRow> predict_with_bundle(const PlanBundle& bundle, const Dataset& target);

PlanBundle bundle_from_result(const PipelineResult& result);

}  // namespace tmc
