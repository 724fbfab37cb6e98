#pragma once

#include <cstdint>
#include <string>

#include "tmc/datagen.hpp"
#include "tmc/eval.hpp"
#include "tmc/lasso.hpp"
#include "tmc/pipeline.hpp"

namespace tmc {

// One configuration object for every subcommand. Unknown JSON keys are
// rejected; each numeric field is validated by its owning module.
struct RunConfig {
  std::uint64_t seed = 42;
  std::size_t jobs = 0;  // 0 = all available processors
  GenOptions datagen;
  int gen_targets = 0;  // extra shifted target intersections emitted by `gen`
  ShiftSpec gen_shift;
  LassoConfig lasso;
  TwoStageConfig boosting;
  double substitution_fraction = 0.10;
  EvalSettings eval;

  void validate() const;
  PipelineConfig pipeline_config() const;
  LoioConfig loio_config() const;
  std::size_t effective_jobs() const;
};

RunConfig run_config_from_json(const std::string& json_text);
std::string run_config_to_json(const RunConfig& config);

// Recursive overlay merge: scalars and arrays replace, objects merge by key.
std::string merge_config_json(const std::string& base_json, const std::string& overlay_json);

}  // namespace tmc
