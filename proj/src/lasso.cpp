#include "tmc/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tmc/errors.hpp"
#include "tmc/rng.hpp"
#include "tmc/text.hpp"

namespace tmc {

namespace {

void check_finite(const Matrix& x, const std::vector<double>& y) {
  for (const double v : x.data)
    if (!std::isfinite(v)) throw NumericError("non-finite predictor value");
  for (const double v : y)
    if (!std::isfinite(v)) throw NumericError("non-finite response value");
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// Column-major copy so coordinate sweeps stream contiguously.
std::vector<std::vector<double>> columns_of(const Matrix& x) {
  std::vector<std::vector<double>> cols(x.cols, std::vector<double>(x.rows));
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) cols[j][i] = x.at(i, j);
  return cols;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Standardized standardize(const Matrix& x, const std::vector<double>& y) {
  if (x.rows < 2) throw UsageError("standardize requires at least 2 rows");
  if (y.size() != x.rows) throw UsageError("response length disagrees with matrix rows");
  check_finite(x, y);

  Standardized out;
  out.x = Matrix(x.rows, x.cols);
  out.stats.mean.resize(x.cols);
  out.stats.stddev.resize(x.cols);

  const double n = static_cast<double>(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double mu = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) mu += x.at(i, j);
    mu /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double d = x.at(i, j) - mu;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    out.stats.mean[j] = mu;
    out.stats.stddev[j] = sd;
    if (sd > 0.0) {
      for (std::size_t i = 0; i < x.rows; ++i) out.x.at(i, j) = (x.at(i, j) - mu) / sd;
    }
    // constant column stays all-zero
  }

  double ymu = std::accumulate(y.begin(), y.end(), 0.0) / n;
  out.stats.response_mean = ymu;
  out.y.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out.y[i] = y[i] - ymu;
  return out;
}

double lasso_lambda_max(const Matrix& x, const std::vector<double>& y) {
  double best = 0.0;
  for (std::size_t j = 0; j < x.cols; ++j) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) d += x.at(i, j) * y[i];
    best = std::max(best, std::abs(d));
  }
  return 2.0 * best;
}

double lasso_objective(const Matrix& x, const std::vector<double>& y,
                       const std::vector<double>& beta, double lambda) {
  double rss = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) pred += x.at(i, j) * beta[j];
    const double r = y[i] - pred;
    rss += r * r;
  }
  double penalty = 0.0;
  for (const double b : beta) penalty += std::abs(b);
  return rss + lambda * penalty;
}

LassoFit fit_lasso(const Matrix& x, const std::vector<double>& y, double lambda, double tol,
                   int max_iter, const std::vector<double>* warm_start) {
  if (lambda < 0.0) throw UsageError("lambda must be >= 0");
  if (!(tol > 0.0)) throw UsageError("tol must be positive");
  if (max_iter < 1) throw UsageError("max_iter must be >= 1");
  if (y.size() != x.rows) throw UsageError("response length disagrees with matrix rows");
  check_finite(x, y);

  const std::size_t p = x.cols;
  const auto cols = columns_of(x);
  std::vector<double> sq_norm(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) sq_norm[j] = dot(cols[j], cols[j]);

  LassoFit fit;
  fit.beta.assign(p, 0.0);
  if (warm_start != nullptr) {
    if (warm_start->size() != p) throw UsageError("warm start size mismatch");
    fit.beta = *warm_start;
  }

  std::vector<double> residual = y;
  for (std::size_t j = 0; j < p; ++j) {
    if (fit.beta[j] != 0.0)
      for (std::size_t i = 0; i < x.rows; ++i) residual[i] -= cols[j][i] * fit.beta[j];
  }

  const double lam_max = lasso_lambda_max(x, y);
  const double kkt_slack = std::max(tol * lam_max, 1e-12);

  auto kkt_ok = [&]() {
    for (std::size_t j = 0; j < p; ++j) {
      if (sq_norm[j] == 0.0) continue;
      const double g = 2.0 * dot(cols[j], residual);
      if (fit.beta[j] == 0.0) {
        if (std::abs(g) > lambda + 0.5 * kkt_slack) return false;
      } else if (std::abs(g - lambda * (fit.beta[j] > 0.0 ? 1.0 : -1.0)) > 0.5 * kkt_slack) {
        return false;
      }
    }
    return true;
  };

  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (sq_norm[j] == 0.0) continue;  // constant column: coefficient stays 0
      const double old = fit.beta[j];
      const double z = dot(cols[j], residual) + old * sq_norm[j];
      const double next = soft_threshold(z, lambda * 0.5) / sq_norm[j];
      if (next != old) {
        const double delta = next - old;
        for (std::size_t i = 0; i < x.rows; ++i) residual[i] -= cols[j][i] * delta;
        fit.beta[j] = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    fit.sweeps = sweep + 1;
    fit.objective_trace.push_back(lasso_objective(x, y, fit.beta, lambda));
    if (max_change < tol && kkt_ok()) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

LambdaSelection select_lambda(const Matrix& x, const std::vector<double>& y, int n_folds,
                              int grid_size, std::uint64_t seed, double tol, int max_iter) {
  if (n_folds < 2) throw UsageError("n_folds must be >= 2");
  if (grid_size < 1) throw UsageError("grid_size must be >= 1");
  if (x.rows < static_cast<std::size_t>(n_folds))
    throw UsageError("fewer instances than folds");
  check_finite(x, y);

  LambdaSelection sel;
  const double lam_max = lasso_lambda_max(x, y);
  sel.grid.resize(static_cast<std::size_t>(grid_size));
  if (grid_size == 1 || lam_max == 0.0) {
    std::fill(sel.grid.begin(), sel.grid.end(), lam_max);
  } else {
    const double hi = std::log(lam_max);
    const double lo = std::log(1e-4 * lam_max);
    for (int g = 0; g < grid_size; ++g)
      sel.grid[static_cast<std::size_t>(g)] =
          std::exp(hi + (lo - hi) * static_cast<double>(g) / static_cast<double>(grid_size - 1));
  }

  // Deterministic fold assignment: shuffled indices dealt round-robin.
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<int> fold_of(x.rows);
  for (std::size_t i = 0; i < order.size(); ++i)
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));

  sel.mean_mse.assign(sel.grid.size(), 0.0);
  for (int f = 0; f < n_folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < x.rows; ++i)
      (fold_of[i] == f ? test_idx : train_idx).push_back(i);

    Matrix xt(train_idx.size(), x.cols);
    std::vector<double> yt(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      for (std::size_t j = 0; j < x.cols; ++j) xt.at(i, j) = x.at(train_idx[i], j);
      yt[i] = y[train_idx[i]];
    }

    std::vector<double> warm(x.cols, 0.0);
    for (std::size_t g = 0; g < sel.grid.size(); ++g) {
      const LassoFit fit = fit_lasso(xt, yt, sel.grid[g], tol, max_iter, &warm);
      warm = fit.beta;
      double sse = 0.0;
      for (const std::size_t i : test_idx) {
        double pred = 0.0;
        for (std::size_t j = 0; j < x.cols; ++j) pred += x.at(i, j) * fit.beta[j];
        const double r = y[i] - pred;
        sse += r * r;
      }
      sel.mean_mse[g] += sse / static_cast<double>(test_idx.size());
    }
  }
  for (auto& m : sel.mean_mse) m /= static_cast<double>(n_folds);

  std::size_t best = 0;
  for (std::size_t g = 1; g < sel.grid.size(); ++g)
    if (sel.mean_mse[g] < sel.mean_mse[best]) best = g;
  sel.lambda = sel.grid[best];
  return sel;
}

double LassoModel::predict(std::span<const double> x) const {
  double out = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) out += coefficients[j] * x[j];
  return out;
}

void LassoConfig::validate() const {
  if (grid_size < 1) throw UsageError("lasso.grid_size must be >= 1");
  if (folds < 2) throw UsageError("lasso.folds must be >= 2");
  if (!(tolerance > 0.0)) throw UsageError("lasso.tolerance must be positive");
  if (max_iter < 1) throw UsageError("lasso.max_iter must be >= 1");
}

FeatureSelection select_features(const Dataset& dataset, const LassoConfig& config,
                                 std::uint64_t seed) {
  config.validate();
  if (dataset.empty()) throw UsageError("select_features requires a non-empty dataset");
  const Matrix x = features_matrix(dataset);

  FeatureSelection out;
  for (int m = 0; m < 3; ++m) {
    const std::vector<double> y = labels_vector(dataset, m);
    const Standardized std_data = standardize(x, y);
    const LambdaSelection sel =
        select_lambda(std_data.x, std_data.y, config.folds, config.grid_size,
                      derive_seed(seed, static_cast<std::uint64_t>(m)), config.tolerance,
                      config.max_iter);
    const LassoFit fit =
        fit_lasso(std_data.x, std_data.y, sel.lambda, config.tolerance, config.max_iter);

    LassoModel model;
    model.lambda = sel.lambda;
    model.stats = std_data.stats;
    model.std_coefficients = fit.beta;
    model.coefficients.assign(kNumVars, 0.0);
    double intercept = std_data.stats.response_mean;
    for (std::size_t j = 0; j < kNumVars; ++j) {
      if (!std_data.stats.is_constant(j)) {
        model.coefficients[j] = fit.beta[j] / std_data.stats.stddev[j];
        intercept -= model.coefficients[j] * std_data.stats.mean[j];
      }
    }
    model.intercept = intercept;
    for (std::size_t j = 0; j < kNumVars; ++j)
      if (std::abs(fit.beta[j]) >= kSelectionTolerance)
        model.selected.push_back(variable_names()[j]);
    out.models[static_cast<std::size_t>(m)] = std::move(model);
  }

  for (std::size_t j = 0; j < kNumVars; ++j) {
    bool any = false;
    for (const auto& model : out.models)
      if (std::abs(model.std_coefficients[j]) >= kSelectionTolerance) any = true;
    if (any) {
      out.selected_union.push_back(variable_names()[j]);
      out.selected_indices.push_back(static_cast<int>(j));
    }
  }
  return out;
}

std::string FeatureSelection::coefficient_table_csv() const {
  std::string out = "variable,left_turn,through,right_turn\n";
  for (std::size_t j = 0; j < kNumVars; ++j) {
    out += variable_names()[j];
    for (const auto& model : models) {
      out.push_back(',');
      out += format_double(model.coefficients[j]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string FeatureSelection::to_json() const {
  nlohmann::ordered_json j;
  j["selected"] = selected_union;
  for (int m = 0; m < 3; ++m) {
    const auto& model = models[static_cast<std::size_t>(m)];
    nlohmann::ordered_json mj;
    mj["lambda"] = model.lambda;
    mj["intercept"] = model.intercept;
    mj["selected"] = model.selected;
    nlohmann::ordered_json coefs;
    for (std::size_t v = 0; v < kNumVars; ++v) {
      coefs[variable_names()[v]] = {{"raw", model.coefficients[v]},
                                    {"standardized", model.std_coefficients[v]}};
    }
    mj["coefficients"] = std::move(coefs);
    j["movements"][kMovementNames[static_cast<std::size_t>(m)]] = std::move(mj);
  }
  return j.dump(2) + "\n";
}

}  // namespace tmc
