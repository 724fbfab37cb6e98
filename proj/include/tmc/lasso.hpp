#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tmc/domain.hpp"
#include "tmc/matrix.hpp"

namespace tmc {

struct StandardizationStats {
  std::vector<double> mean;    // per predictor
  std::vector<double> stddev;  // per predictor; 0 flags a constant column
  double response_mean = 0.0;

  bool is_constant(std::size_t j) const { return stddev[j] == 0.0; }
};

struct Standardized {
  Matrix x;                // non-constant columns: mean 0, sample std 1; constant: all zero
  std::vector<double> y;   // mean-centered response
  StandardizationStats stats;
};

// Requires n >= 2. Sample standard deviation (n-1 denominator).
Standardized standardize(const Matrix& x, const std::vector<double>& y);

struct LassoFit {
  std::vector<double> beta;  // standardized scale
  bool converged = false;
  int sweeps = 0;
  std::vector<double> objective_trace;  // penalized objective after each sweep
};

// Minimizes sum_i(y_i - x_i.beta)^2 + lambda * sum_j|beta_j| by cyclic
// coordinate descent with soft-thresholding. With the unscaled residual sum
// the per-coordinate threshold is lambda/2. Inputs are expected standardized
// but any finite matrix works; constant (all-zero) columns keep beta_j = 0.
LassoFit fit_lasso(const Matrix& x, const std::vector<double>& y, double lambda, double tol,
                   int max_iter, const std::vector<double>* warm_start = nullptr);

// Smallest penalty at which every coefficient is zero: 2 * max_j |x_j . y|.
double lasso_lambda_max(const Matrix& x, const std::vector<double>& y);

double lasso_objective(const Matrix& x, const std::vector<double>& y,
                       const std::vector<double>& beta, double lambda);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> grid;      // descending from lambda_max
  std::vector<double> mean_mse;  // mean fold MSE per grid point
};

// Log-spaced grid from lambda_max down to 1e-4*lambda_max, warm-started path
// per fold, deterministic fold shuffle from seed. Picks the minimum-CV-error
// lambda (ties keep the larger penalty).
LambdaSelection select_lambda(const Matrix& x, const std::vector<double>& y, int n_folds,
                              int grid_size, std::uint64_t seed, double tol, int max_iter);

struct LassoModel {
  double lambda = 0.0;
  std::vector<double> coefficients;      // original predictor scale
  double intercept = 0.0;
  std::vector<double> std_coefficients;  // standardized scale
  StandardizationStats stats;
  std::vector<std::string> selected;     // |standardized coef| >= selection tolerance

  double predict(std::span<const double> x) const;
};

inline constexpr double kSelectionTolerance = 1e-8;

struct LassoConfig {
  int grid_size = 50;
  int folds = 5;
  double tolerance = 1e-7;
  int max_iter = 1000;

  void validate() const;
};

struct FeatureSelection {
  std::array<LassoModel, 3> models;         // left, through, right
  std::vector<std::string> selected_union;  // in fixed variable order
  std::vector<int> selected_indices;

  // 24 rows x 3 movement columns, original-scale coefficients.
  std::string coefficient_table_csv() const;
  std::string to_json() const;
};

FeatureSelection select_features(const Dataset& dataset, const LassoConfig& config,
                                 std::uint64_t seed);

}  // namespace tmc
