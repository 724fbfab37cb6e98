#include "tmc/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmc/errors.hpp"
#include "tmc/log.hpp"
#include "tmc/parallel.hpp"
#include "tmc/rng.hpp"

namespace tmc {

namespace {
constexpr double kResidualFloor = 1e-12;
constexpr double kBetaFloor = 1e-12;       // perfect-fit stage weight stays finite
constexpr double kDegenerateBeta = 0.999;  // round-1 degeneracy keeps a usable tree
}  // namespace

LossKind loss_from_string(const std::string& s) {
  if (s == "linear") return LossKind::kLinear;
  if (s == "square") return LossKind::kSquare;
  if (s == "exponential") return LossKind::kExponential;
  throw UsageError("unknown loss: '" + s + "' (expected linear|square|exponential)");
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kLinear: return "linear";
    case LossKind::kSquare: return "square";
    default: return "exponential";
  }
}

std::vector<double> adjusted_errors(const std::vector<double>& residuals, LossKind kind) {
  double d = 0.0;
  for (const double r : residuals) {
    if (r < 0.0) throw UsageError("residuals must be nonnegative");
    d = std::max(d, r);
  }
  d = std::max(d, kResidualFloor);
  std::vector<double> e(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double u = residuals[i] / d;
    switch (kind) {
      case LossKind::kLinear: e[i] = u; break;
      case LossKind::kSquare: e[i] = u * u; break;
      default: e[i] = 1.0 - std::exp(-u); break;
    }
  }
  return e;
}

double weighted_median(const std::vector<double>& values, const std::vector<double>& weights) {
  if (values.empty()) throw UsageError("weighted_median of empty input");
  if (values.size() != weights.size()) throw UsageError("weighted_median length mismatch");
  double total = 0.0;
  for (const double w : weights) {
    if (w < 0.0) throw UsageError("weighted_median: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw UsageError("weighted_median: weights sum to zero");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  double cum = 0.0;
  for (const std::size_t i : order) {
    cum += weights[i];
    if (cum >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

double WeightVector::target_mass() const {
  double t = 0.0;
  for (std::size_t i = n_source; i < weights.size(); ++i) t += weights[i];
  return t;
}

void WeightVector::validate() const {
  if (n_source > weights.size()) throw UsageError("n_source exceeds weight count");
  double sum = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw UsageError("weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw UsageError("weights must sum to 1 (got " + std::to_string(sum) + ")");
}

double AdaBoostEnsemble::predict_raw(std::span<const double> x) const {
  if (trees.empty()) throw UsageError("predict on an empty ensemble");
  std::vector<double> preds(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) preds[t] = trees[t].predict(x);
  return weighted_median(preds, stage_log_weights);
}

double AdaBoostEnsemble::predict(std::span<const double> x) const {
  return std::max(0.0, predict_raw(x));
}

void AdaBoostConfig::validate() const {
  if (iterations < 1) throw UsageError("boosting.iterations must be >= 1");
  tree.validate();
}

AdaBoostEnsemble adaboost_r2_fit(const Matrix& x, const std::vector<double>& y,
                                 std::vector<double> weights, const AdaBoostConfig& config,
                                 std::size_t frozen_source_count, const Presorted* presorted) {
  config.validate();
  if (x.rows == 0 || x.rows != y.size() || x.rows != weights.size())
    throw UsageError("adaboost_r2_fit: dimension mismatch");
  if (frozen_source_count > x.rows)
    throw UsageError("adaboost_r2_fit: frozen block larger than the pool");
  double sum = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0)) throw UsageError("adaboost_r2_fit: invalid weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw UsageError("adaboost_r2_fit: weights sum to zero");
  for (auto& w : weights) w /= sum;

  Presorted local_presort;
  if (presorted == nullptr) {
    local_presort = presort_matrix(x);
    presorted = &local_presort;
  }

  AdaBoostEnsemble ensemble;
  ensemble.loss = config.loss;

  for (int t = 0; t < config.iterations; ++t) {
    // residuals and their normalization cover the weighted rows only
    std::vector<std::size_t> active;
    active.reserve(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
      if (weights[i] > 0.0) active.push_back(i);

    Tree tree = fit_tree(x, *presorted, y, weights, config.tree);
    std::vector<double> active_residuals(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t i = active[k];
      active_residuals[k] = std::abs(tree.predict(x.row(i)) - y[i]);
    }
    const std::vector<double> active_errors = adjusted_errors(active_residuals, config.loss);
    std::vector<double> errors(x.rows, 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) errors[active[k]] = active_errors[k];
    double avg_error = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) avg_error += weights[i] * errors[i];

    if (avg_error <= 0.0) {
      // perfect fit: keep this tree with a large finite vote and stop
      ensemble.trees.push_back(std::move(tree));
      ensemble.stage_log_weights.push_back(std::log(1.0 / kBetaFloor));
      break;
    }
    if (avg_error >= 0.5) {
      if (t == 0) {
        ensemble.trees.push_back(std::move(tree));
        ensemble.stage_log_weights.push_back(std::log(1.0 / kDegenerateBeta));
        ensemble.degenerate = true;
        log_warn("adaboost_r2_fit: round-1 weighted error >= 0.5; keeping a single tree");
      }
      break;  // later rounds: discard this round, keep the ensemble so far
    }

    const double beta = avg_error / (1.0 - avg_error);
    ensemble.trees.push_back(std::move(tree));
    ensemble.stage_log_weights.push_back(std::log(1.0 / beta));

    if (t + 1 >= config.iterations) break;
    if (frozen_source_count == 0) {
      double z = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) {
        weights[i] *= std::pow(beta, 1.0 - errors[i]);
        z += weights[i];
      }
      for (auto& w : weights) w /= z;
    } else if (frozen_source_count < x.rows) {
      double before = 0.0, after = 0.0;
      for (std::size_t i = frozen_source_count; i < x.rows; ++i) before += weights[i];
      for (std::size_t i = frozen_source_count; i < x.rows; ++i) {
        weights[i] *= std::pow(beta, 1.0 - errors[i]);
        after += weights[i];
      }
      if (after > 0.0) {
        const double scale = before / after;
        for (std::size_t i = frozen_source_count; i < x.rows; ++i) weights[i] *= scale;
      }
    }
    // frozen_source_count == x.rows: every weight is frozen, nothing to update
  }
  return ensemble;
}

BetaSolution solve_beta(const WeightVector& weights, const std::vector<double>& source_errors,
                        double target_fraction) {
  weights.validate();
  if (source_errors.size() != weights.n_source)
    throw UsageError("solve_beta: one error per source instance required");
  for (const double e : source_errors)
    if (e < 0.0 || e > 1.0) throw UsageError("solve_beta: adjusted errors must be in [0,1]");
  const double current = weights.target_mass();
  if (target_fraction < current - kBetaMassTolerance || target_fraction > 1.0 + 1e-12)
    throw UsageError("solve_beta: target fraction must lie in [current mass, 1]");

  if (target_fraction <= current + kBetaMassTolerance) return {1.0, false};

  double positive_error_mass = 0.0;
  for (std::size_t i = 0; i < weights.n_source; ++i)
    if (source_errors[i] > 0.0) positive_error_mass += weights.weights[i];
  if (positive_error_mass == 0.0) return {1.0, true};  // beta^0 = 1 for every beta

  const auto mass_at = [&](double beta) {
    double source = 0.0;
    for (std::size_t i = 0; i < weights.n_source; ++i)
      source += weights.weights[i] * std::pow(beta, source_errors[i]);
    return current / (current + source);
  };

  if (mass_at(0.0) < target_fraction - kBetaMassTolerance)
    return {0.0, true};  // even discarding all error-bearing sources falls short
  if (std::abs(mass_at(0.0) - target_fraction) <= kBetaMassTolerance) return {0.0, false};

  double lo = 0.0, hi = 1.0;  // mass(lo) >= f >= mass(hi)
  for (int it = 0; it < kBetaMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass_at(mid);
    if (std::abs(m - target_fraction) <= kBetaMassTolerance) return {mid, false};
    if (m > target_fraction) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // No representable beta hits the fraction (tiny adjusted errors make the
  // update insensitive). Take the undershooting endpoint: the schedule is
  // approached from below and never leapfrogged.
  return {hi, true};
}

WeightVector update_weights(const WeightVector& weights,
                            const std::vector<double>& source_errors, double beta) {
  weights.validate();
  if (source_errors.size() != weights.n_source)
    throw UsageError("update_weights: one error per source instance required");
  if (beta < 0.0 || beta > 1.0) throw UsageError("update_weights: beta must be in [0,1]");

  WeightVector out = weights;
  double z = 0.0;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    if (i < out.n_source) out.weights[i] *= std::pow(beta, source_errors[i]);
    z += out.weights[i];
  }
  if (!(z > 0.0)) throw NumericError("update_weights: all mass vanished");
  for (auto& w : out.weights) w /= z;
  return out;
}

double schedule_fraction(std::size_t n, std::size_t m, int steps, int t) {
  if (steps < 1) throw UsageError("schedule steps must be >= 1");
  if (t < 0 || t >= steps) throw UsageError("schedule step out of range");
  if (n + m == 0) throw UsageError("schedule over an empty pool");
  const double base = static_cast<double>(m) / static_cast<double>(n + m);
  if (steps == 1) return base;          // single stage runs at the base mass
  if (t == steps - 1) return 1.0;       // exact endpoint
  return base + (static_cast<double>(t) / static_cast<double>(steps - 1)) * (1.0 - base);
}

std::vector<int> cv_fold_assignment(std::size_t count, int folds, std::uint64_t seed) {
  if (folds < 1) throw UsageError("folds must be >= 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<int> fold_of(count);
  for (std::size_t i = 0; i < count; ++i)
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return fold_of;
}

void TwoStageConfig::validate() const {
  if (steps < 1) throw UsageError("boosting.steps must be >= 1");
  if (folds < 2) throw UsageError("boosting.folds must be >= 2");
  if (iterations < 1) throw UsageError("boosting.iterations must be >= 1");
  tree.validate();
}

double TrAModel::predict(std::span<const double> x) const {
  if (stage_models.empty()) throw UsageError("predict on an untrained model");
  return stage_models[chosen_stage].predict(x);
}

TrAModel two_stage_fit(const Matrix& x_source, const std::vector<double>& y_source,
                       const Matrix& x_target, const std::vector<double>& y_target,
                       const TwoStageConfig& config) {
  config.validate();
  const std::size_t n = x_source.rows;
  const std::size_t m = x_target.rows;
  if (n == 0 || m == 0) throw UsageError("two_stage_fit: both datasets must be non-empty");
  if (x_source.cols != x_target.cols) throw UsageError("two_stage_fit: feature mismatch");
  if (m < static_cast<std::size_t>(config.folds))
    throw UsageError("two_stage_fit: fewer target instances (" + std::to_string(m) +
                     ") than folds (" + std::to_string(config.folds) + ")");

  // Pool: source block first, then target block.
  Matrix pool(n + m, x_source.cols);
  std::vector<double> y(n + m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < pool.cols; ++j) pool.at(i, j) = x_source.at(i, j);
    y[i] = y_source[i];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < pool.cols; ++j) pool.at(n + i, j) = x_target.at(i, j);
    y[n + i] = y_target[i];
  }

  WeightVector w;
  w.n_source = n;
  w.weights.assign(n + m, 1.0 / static_cast<double>(n + m));

  AdaBoostConfig inner;
  inner.iterations = config.iterations;
  inner.loss = config.loss;
  inner.tree = config.tree;

  TrAModel model;
  model.n_source = n;
  model.n_target = m;

  const Presorted presorted = presort_matrix(pool);

  for (int t = 0; t < config.steps; ++t) {
    const double fraction = schedule_fraction(n, m, config.steps, t);

    // One weighted tree on the current pool supplies the adjusted errors that
    // drive the source down-weighting.
    const Tree error_tree = fit_tree(pool, presorted, y, w.weights, config.tree);
    std::vector<std::size_t> active;
    active.reserve(n + m);
    for (std::size_t i = 0; i < n + m; ++i)
      if (w.weights[i] > 0.0) active.push_back(i);
    std::vector<double> active_residuals(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t i = active[k];
      active_residuals[k] = std::abs(error_tree.predict(pool.row(i)) - y[i]);
    }
    const std::vector<double> active_errors = adjusted_errors(active_residuals, config.loss);
    std::vector<double> errors(n + m, 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) errors[active[k]] = active_errors[k];
    const std::vector<double> source_errors(errors.begin(),
                                            errors.begin() + static_cast<std::ptrdiff_t>(n));

    const BetaSolution sol = solve_beta(w, source_errors, fraction);
    if (sol.degenerate)
      log_info("two_stage_fit: stage " + std::to_string(t) + " schedule fraction " +
               std::to_string(fraction) + " unreachable; using beta=" + std::to_string(sol.beta));
    w = update_weights(w, source_errors, sol.beta);

    StageTrace trace;
    trace.fraction = fraction;
    trace.beta = sol.beta;
    trace.degenerate = sol.degenerate;
    trace.weights_after = w.weights;
    model.trace.push_back(std::move(trace));

    // F-fold CV over the target block only; source rows always train. The
    // held-out rows get weight zero, which removes them from the fold's trees
    // and from its residual normalization.
    const std::vector<int> fold_of = cv_fold_assignment(
        m, config.folds, derive_seed(config.seed, 0xF01D0000ULL + static_cast<std::uint64_t>(t)));
    std::vector<double> fold_rmse(static_cast<std::size_t>(config.folds), 0.0);
    parallel_for(config.jobs, static_cast<std::size_t>(config.folds), [&](std::size_t f) {
      std::vector<double> wt = w.weights;
      std::vector<std::size_t> held_out;
      for (std::size_t i = 0; i < m; ++i) {
        if (fold_of[i] == static_cast<int>(f)) {
          wt[n + i] = 0.0;
          held_out.push_back(i);
        }
      }
      const AdaBoostEnsemble fold_model = adaboost_r2_fit(pool, y, wt, inner, n, &presorted);
      double sse = 0.0;
      for (const std::size_t i : held_out) {
        const double err = fold_model.predict(x_target.row(i)) - y_target[i];
        sse += err * err;
      }
      fold_rmse[f] = held_out.empty() ? 0.0 : std::sqrt(sse / static_cast<double>(held_out.size()));
    });
    double cv_error = 0.0;
    for (const double r : fold_rmse) cv_error += r;
    cv_error /= static_cast<double>(config.folds);
    model.stage_errors.push_back(cv_error);

    model.stage_models.push_back(adaboost_r2_fit(pool, y, w.weights, inner, n, &presorted));
  }

  model.chosen_stage = 0;
  for (std::size_t t = 1; t < model.stage_errors.size(); ++t)
    if (model.stage_errors[t] < model.stage_errors[model.chosen_stage]) model.chosen_stage = t;
  return model;
}

}  // namespace tmc
