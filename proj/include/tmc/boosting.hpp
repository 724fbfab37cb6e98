#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmc/matrix.hpp"
#include "tmc/tree.hpp"

namespace tmc {

enum class LossKind { kLinear, kSquare, kExponential };

LossKind loss_from_string(const std::string& s);
std::string loss_name(LossKind kind);

// Residuals scaled by the round's maximum residual (floored at 1e-12) and
// mapped into [0,1] by the chosen loss.
std::vector<double> adjusted_errors(const std::vector<double>& residuals, LossKind kind);

// Smallest value whose cumulative weight reaches half the total.
double weighted_median(const std::vector<double>& values, const std::vector<double>& weights);

// Source block first, target block second; normalized to sum 1.
struct WeightVector {
  std::vector<double> weights;
  std::size_t n_source = 0;

  std::size_t n_target() const { return weights.size() - n_source; }
  double target_mass() const;
  void validate() const;
};

struct AdaBoostEnsemble {
  std::vector<Tree> trees;
  std::vector<double> stage_log_weights;  // ln(1/beta) per kept round
  LossKind loss = LossKind::kLinear;
  bool degenerate = false;  // round-1 weighted error reached 0.5

  double predict_raw(std::span<const double> x) const;  // weighted median
  double predict(std::span<const double> x) const;      // clamped at 0 (counts)
};

struct AdaBoostConfig {
  int iterations = 30;  // T
  LossKind loss = LossKind::kLinear;
  TreeParams tree;

  void validate() const;
};

// Drucker's AdaBoost.R2 over weighted CART. When frozen_source_count > 0 the
// first block of weights is held fixed; only target-block weights update and
// their total mass is preserved round to round. Rows with zero weight are
// invisible: excluded from the trees and from the residual normalization.
// Passing a presort lets callers amortize the per-feature ordering.
AdaBoostEnsemble adaboost_r2_fit(const Matrix& x, const std::vector<double>& y,
                                 std::vector<double> weights, const AdaBoostConfig& config,
                                 std::size_t frozen_source_count = 0,
                                 const Presorted* presorted = nullptr);

struct BetaSolution {
  double beta = 1.0;
  bool degenerate = false;  // requested mass unreachable
};

// Finds beta in [0,1] such that after w_i <- w_i * beta^{e_i} on the source
// block and renormalization the target mass equals target_fraction. Target
// mass is monotone decreasing in beta, so bisection applies; beta = 0 is the
// exact solution at target_fraction = 1 (0^0 := 1 keeps zero-error sources).
BetaSolution solve_beta(const WeightVector& weights, const std::vector<double>& source_errors,
                        double target_fraction);

inline constexpr double kBetaMassTolerance = 1e-8;
inline constexpr int kBetaMaxIterations = 200;

WeightVector update_weights(const WeightVector& weights,
                            const std::vector<double>& source_errors, double beta);

// Outer-step target-mass schedule: m/(n+m) + (t/(S-1)) * (1 - m/(n+m)),
// pinned to the exact endpoints; S = 1 runs the single step at the base mass.
double schedule_fraction(std::size_t n, std::size_t m, int steps, int t);

// Deterministic K-fold assignment: shuffled indices dealt round-robin.
std::vector<int> cv_fold_assignment(std::size_t count, int folds, std::uint64_t seed);

struct TwoStageConfig {
  int steps = 10;       // S
  int folds = 5;        // F
  int iterations = 30;  // T
  LossKind loss = LossKind::kLinear;
  TreeParams tree;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  void validate() const;
};

// Per-stage record kept for verification.
struct StageTrace {
  double fraction = 0.0;
  double beta = 1.0;
  bool degenerate = false;
  std::vector<double> weights_after;
};

struct TrAModel {
  std::vector<AdaBoostEnsemble> stage_models;
  std::vector<double> stage_errors;  // F-fold CV RMSE per stage
  std::size_t chosen_stage = 0;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  std::vector<StageTrace> trace;

  double predict(std::span<const double> x) const;
};

// Two-stage TrAdaBoost.R2: the outer loop walks target mass along the
// schedule; each stage trains a frozen-source AdaBoost.R2 on the full pool
// and scores it by F-fold cross-validation over the target block only. The
// stage with the smallest CV error is the deployed model.
TrAModel two_stage_fit(const Matrix& x_source, const std::vector<double>& y_source,
                       const Matrix& x_target, const std::vector<double>& y_target,
                       const TwoStageConfig& config);

}  // namespace tmc
