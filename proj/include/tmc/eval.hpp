#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tmc/boosting.hpp"
#include "tmc/domain.hpp"
#include "tmc/lasso.hpp"
#include "tmc/matrix.hpp"
#include "tmc/pipeline.hpp"

namespace tmc {

double mae(std::span<const double> y, std::span<const double> y_hat);
double rmse(std::span<const double> y, std::span<const double> y_hat);

enum class KnnWeighting { kUniform, kInverseDistance };

KnnWeighting knn_weighting_from_string(const std::string& s);

// Euclidean KNN on predictors z-scored with training statistics. Distance
// ties resolve to the earlier training row; an exact-match query averages the
// zero-distance neighbors under inverse-distance weighting.
std::vector<double> knn_fit_predict(const Matrix& train_x, const std::vector<double>& train_y,
                                    const Matrix& query_x, int k, KnnWeighting weighting);

struct ForestConfig {
  int n_trees = 100;
  TreeParams tree;
  double feature_fraction = 0.7;  // per-split candidate fraction
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Forest {
  std::vector<Tree> trees;

  double predict(std::span<const double> x) const;  // mean of tree outputs
};

Forest forest_fit(const Matrix& x, const std::vector<double>& y, const ForestConfig& config);

// One grid point: parameter name -> value.
using ParamPoint = std::vector<std::pair<std::string, double>>;
// Trains on (x, y) and returns a predictor.
using GridFactory = std::function<std::function<double(std::span<const double>)>(
    const Matrix&, const std::vector<double>&, const ParamPoint&)>;

struct GridSearchResult {
  ParamPoint best;
  double best_rmse = 0.0;
  std::vector<std::pair<ParamPoint, double>> table;  // enumeration order
};

// Exhaustive Cartesian sweep scored by K-fold CV mean RMSE; deterministic
// folds from seed; ties keep the earlier grid point.
GridSearchResult grid_search(const GridFactory& factory,
                             const std::vector<std::pair<std::string, std::vector<double>>>& grid,
                             const Matrix& x, const std::vector<double>& y, int folds,
                             std::uint64_t seed);

struct EvalSettings {
  std::vector<std::string> models = {"TL", "KNN", "Forest", "AdaBoost.R2"};
  int knn_k = 5;
  KnnWeighting knn_weighting = KnnWeighting::kUniform;
  int forest_trees = 100;
  double forest_feature_fraction = 0.7;

  void validate() const;
};

struct EvalCell {
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::vector<std::string> models;
  // model -> {left, through, right}, averaged across held-out intersections
  std::map<std::string, std::array<EvalCell, 3>> summary;

  struct Breakdown {
    std::string intersection;
    std::string model;
    std::array<EvalCell, 3> cells;
  };
  std::vector<Breakdown> per_intersection;
  std::vector<std::string> failures;  // "<intersection>/<model>: <error>"
  std::uint64_t seed = 0;

  std::string summary_csv(const std::string& metric) const;  // "mae" | "rmse"
  std::string to_json() const;
};

struct LoioConfig {
  LassoConfig lasso;
  TwoStageConfig boosting;
  double substitution_fraction = 0.10;
  EvalSettings eval;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Leave-one-intersection-out: each intersection in turn becomes the target
// with labels hidden; every requested model trains on the rest over the
// fold's Lasso-selected variables and is scored per movement on the held-out
// instances. Fold failures are recorded, not fatal.
EvalReport loio_evaluate(const Dataset& dataset, const LoioConfig& config);

}  // namespace tmc
