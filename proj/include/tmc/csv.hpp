#pragma once

#include <string>
#include <vector>

#include "tmc/domain.hpp"

namespace tmc {

// Fixed dataset column order:
// intersection_id,approach_id,day_index,interval_index,<24 predictors>,v_lm,v_tm,v_rm
const std::vector<std::string>& dataset_columns();

// Header-driven parse: columns may appear in any order but the name set must
// match exactly. Row diagnostics carry line numbers and field names.
Dataset read_dataset_csv(const std::string& path, bool allow_unlabeled = false);
Dataset parse_dataset_csv(const std::string& content, const std::string& origin,
                          bool allow_unlabeled = false);

std::string dataset_to_csv(const Dataset& dataset);
void write_dataset_csv(const Dataset& dataset, const std::string& path);

struct PredictionRow {
  std::string intersection_id;
  std::string approach_id;
  int day_index = 0;
  int interval_index = 0;
  double v_lm_hat = 0.0;
  double v_tm_hat = 0.0;
  double v_rm_hat = 0.0;
};

std::string predictions_to_csv(const std::vector<PredictionRow>& rows);
void write_predictions_csv(const std::vector<PredictionRow>& rows, const std::string& path);
std::vector<PredictionRow> read_predictions_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace tmc
