#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tmc/boosting.hpp"
#include "tmc/csv.hpp"
#include "tmc/domain.hpp"
#include "tmc/lasso.hpp"

namespace tmc {

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // zero variance in either input
};

PearsonResult pearson(std::span<const double> a, std::span<const double> b);

// dot(a,b) / (|a| |b|); zero when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// 16-bin time-of-day mean profile of one variable at one intersection,
// averaged over days and approaches. Bins with no data stay absent.
struct ProfileVector {
  std::array<double, kNumPeakBins> mean{};
  std::array<bool, kNumPeakBins> present{};
};

// Keyed by predictor index; static variables are excluded.
using ProfileMap = std::map<int, ProfileVector>;

ProfileMap build_profiles(const Dataset& dataset, const std::string& intersection_id,
                          const std::vector<int>& selected_vars);

struct MatchResult {
  std::string target_id;
  // (source intersection id, summed profile correlation), best first;
  // ties resolve to the lexicographically smaller id.
  std::vector<std::pair<std::string, double>> ranking;

  const std::string& chosen() const { return ranking.front().first; }
};

MatchResult match_intersections(const Dataset& source, const Dataset& target,
                                const std::string& target_id,
                                const std::vector<int>& selected_vars);

struct Substitution {
  std::vector<std::size_t> indices;  // into the matched intersection's rows, best first
  double threshold = 0.0;            // similarity of the last selected instance
  std::vector<double> similarities;  // one per matched-source row
  bool degenerate = false;           // a zero-norm vector was scored as 0
};

// Scores each matched-source instance by cosine similarity between its
// z-scored predictor vector and the z-scored target centroid (statistics from
// the combined source+target rows), and keeps the top ceil(fraction * n).
Substitution substitute_target(const Dataset& matched_source, const Dataset& target_features,
                               const std::vector<int>& vars, double fraction);

struct PipelineConfig {
  LassoConfig lasso;
  TwoStageConfig boosting;
  double substitution_fraction = 0.10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  void validate() const;
};

struct TransferPlan {
  std::string target_intersection;
  MatchResult match;
  std::vector<std::size_t> substitute_indices;
  double substitution_threshold = 0.0;
  std::array<TrAModel, 3> models;  // left, through, right
};

struct PipelineResult {
  FeatureSelection selection;
  std::vector<TransferPlan> plans;          // one per target intersection
  std::vector<PredictionRow> predictions;   // in target row order
};

// Full flow: feature selection on the source pool, per-target matching,
// substitution from the matched intersection, one transfer model per
// movement, predictions clamped at zero. Labels on the target, if any, are
// ignored. A precomputed selection lets callers share it with baselines.
PipelineResult run_pipeline(const Dataset& source, const Dataset& target,
                            const PipelineConfig& config,
                            const FeatureSelection* precomputed_selection = nullptr);

}  // namespace tmc
