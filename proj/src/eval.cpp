#include "tmc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "tmc/errors.hpp"
#include "tmc/log.hpp"
#include "tmc/parallel.hpp"
#include "tmc/rng.hpp"
#include "tmc/text.hpp"

namespace tmc {

double mae(std::span<const double> y, std::span<const double> y_hat) {
  if (y.empty()) throw UsageError("mae of empty input");
  if (y.size() != y_hat.size()) throw UsageError("mae: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  if (y.empty()) throw UsageError("rmse of empty input");
  if (y.size() != y_hat.size()) throw UsageError("rmse: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - y_hat[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(y.size()));
}

KnnWeighting knn_weighting_from_string(const std::string& s) {
  if (s == "uniform") return KnnWeighting::kUniform;
  if (s == "inverse_distance") return KnnWeighting::kInverseDistance;
  throw UsageError("unknown knn weighting: '" + s + "' (expected uniform|inverse_distance)");
}

std::vector<double> knn_fit_predict(const Matrix& train_x, const std::vector<double>& train_y,
                                    const Matrix& query_x, int k, KnnWeighting weighting) {
  if (k < 1) throw UsageError("knn: k must be >= 1");
  if (static_cast<std::size_t>(k) > train_x.rows)
    throw UsageError("knn: k exceeds training size");
  if (train_x.rows != train_y.size()) throw UsageError("knn: dimension mismatch");
  if (train_x.cols != query_x.cols) throw UsageError("knn: feature mismatch");

  const std::size_t p = train_x.cols;
  std::vector<double> mean(p, 0.0), sd(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < train_x.rows; ++i) mean[j] += train_x.at(i, j);
    mean[j] /= static_cast<double>(train_x.rows);
    double ss = 0.0;
    for (std::size_t i = 0; i < train_x.rows; ++i) {
      const double d = train_x.at(i, j) - mean[j];
      ss += d * d;
    }
    sd[j] = train_x.rows > 1 ? std::sqrt(ss / static_cast<double>(train_x.rows - 1)) : 0.0;
  }
  auto z = [&](double v, std::size_t j) { return sd[j] > 0.0 ? (v - mean[j]) / sd[j] : 0.0; };

  std::vector<double> out(query_x.rows, 0.0);
  std::vector<std::pair<double, std::size_t>> dist(train_x.rows);
  for (std::size_t q = 0; q < query_x.rows; ++q) {
    for (std::size_t i = 0; i < train_x.rows; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double d = z(train_x.at(i, j), j) - z(query_x.at(q, j), j);
        d2 += d * d;
      }
      dist[i] = {std::sqrt(d2), i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    if (weighting == KnnWeighting::kUniform) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += train_y[dist[static_cast<std::size_t>(t)].second];
      out[q] = s / static_cast<double>(k);
    } else {
      constexpr double kZero = 1e-12;
      bool exact = false;
      for (int t = 0; t < k; ++t)
        if (dist[static_cast<std::size_t>(t)].first <= kZero) exact = true;
      if (exact) {
        double s = 0.0;
        std::size_t c = 0;
        for (int t = 0; t < k; ++t) {
          if (dist[static_cast<std::size_t>(t)].first <= kZero) {
            s += train_y[dist[static_cast<std::size_t>(t)].second];
            ++c;
          }
        }
        out[q] = s / static_cast<double>(c);
      } else {
        double num = 0.0, den = 0.0;
        for (int t = 0; t < k; ++t) {
          const double w = 1.0 / dist[static_cast<std::size_t>(t)].first;
          num += w * train_y[dist[static_cast<std::size_t>(t)].second];
          den += w;
        }
        out[q] = num / den;
      }
    }
  }
  return out;
}

void ForestConfig::validate() const {
  if (n_trees < 1) throw UsageError("forest: n_trees must be >= 1");
  if (!(feature_fraction > 0.0) || feature_fraction > 1.0)
    throw UsageError("forest: feature_fraction must be in (0,1]");
  tree.validate();
}

double Forest::predict(std::span<const double> x) const {
  if (trees.empty()) throw UsageError("predict on an empty forest");
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x);
  return s / static_cast<double>(trees.size());
}

Forest forest_fit(const Matrix& x, const std::vector<double>& y, const ForestConfig& config) {
  config.validate();
  if (x.rows == 0 || x.rows != y.size()) throw UsageError("forest: dimension mismatch");

  Forest forest;
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  const Presorted presorted = presort_matrix(x);
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
    std::vector<double> weights(x.rows, 1.0);
    if (config.bootstrap) {
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t i = 0; i < x.rows; ++i) weights[rng.uniform_int(x.rows)] += 1.0;
    }

    const std::size_t n_candidates = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(config.feature_fraction * static_cast<double>(x.cols) - 1e-9)));
    FeatureSampler sampler = [&rng, n_candidates, cols = x.cols]() {
      std::vector<int> all(cols);
      std::iota(all.begin(), all.end(), 0);
      if (n_candidates >= cols) return all;
      // partial Fisher-Yates, then ascending order for the deterministic scan
      for (std::size_t i = 0; i < n_candidates; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(cols - i));
        std::swap(all[i], all[j]);
      }
      std::vector<int> chosen(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_candidates));
      std::sort(chosen.begin(), chosen.end());
      return chosen;
    };
    const FeatureSampler* sampler_ptr = n_candidates >= x.cols ? nullptr : &sampler;
    forest.trees[static_cast<std::size_t>(t)] =
        fit_tree(x, presorted, y, weights, config.tree, sampler_ptr);
  }
  return forest;
}

GridSearchResult grid_search(const GridFactory& factory,
                             const std::vector<std::pair<std::string, std::vector<double>>>& grid,
                             const Matrix& x, const std::vector<double>& y, int folds,
                             std::uint64_t seed) {
  if (grid.empty()) throw UsageError("grid_search: empty grid");
  for (const auto& [name, values] : grid)
    if (values.empty()) throw UsageError("grid_search: empty value list for '" + name + "'");
  if (folds < 2) throw UsageError("grid_search: folds must be >= 2");
  if (x.rows < static_cast<std::size_t>(folds))
    throw UsageError("grid_search: fewer instances than folds");

  // Cartesian enumeration, last axis fastest.
  std::vector<ParamPoint> points;
  std::vector<std::size_t> cursor(grid.size(), 0);
  for (;;) {
    ParamPoint point;
    for (std::size_t a = 0; a < grid.size(); ++a)
      point.emplace_back(grid[a].first, grid[a].second[cursor[a]]);
    points.push_back(std::move(point));
    std::size_t axis = grid.size();
    while (axis > 0) {
      --axis;
      if (++cursor[axis] < grid[axis].second.size()) break;
      cursor[axis] = 0;
      if (axis == 0) goto done;
    }
  }
done:

  const std::vector<int> fold_of = cv_fold_assignment(x.rows, folds, seed);

  GridSearchResult result;
  for (const auto& point : points) {
    double total_rmse = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < x.rows; ++i)
        (fold_of[i] == f ? test_idx : train_idx).push_back(i);
      Matrix xt(train_idx.size(), x.cols);
      std::vector<double> yt(train_idx.size());
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) xt.at(i, j) = x.at(train_idx[i], j);
        yt[i] = y[train_idx[i]];
      }
      const auto predictor = factory(xt, yt, point);
      std::vector<double> truth, pred;
      truth.reserve(test_idx.size());
      pred.reserve(test_idx.size());
      for (const std::size_t i : test_idx) {
        truth.push_back(y[i]);
        pred.push_back(predictor(x.row(i)));
      }
      total_rmse += rmse(truth, pred);
    }
    result.table.emplace_back(point, total_rmse / static_cast<double>(folds));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.table.size(); ++i)
    if (result.table[i].second < result.table[best].second) best = i;
  result.best = result.table[best].first;
  result.best_rmse = result.table[best].second;
  return result;
}

void EvalSettings::validate() const {
  if (models.empty()) throw UsageError("eval.models must be non-empty");
  static const std::set<std::string> known = {"TL", "KNN", "Forest", "AdaBoost.R2"};
  for (const auto& m : models)
    if (known.find(m) == known.end()) throw UsageError("eval: unknown model '" + m + "'");
  if (knn_k < 1) throw UsageError("eval.knn_k must be >= 1");
  if (forest_trees < 1) throw UsageError("eval.forest_trees must be >= 1");
  if (!(forest_feature_fraction > 0.0) || forest_feature_fraction > 1.0)
    throw UsageError("eval.forest_feature_fraction must be in (0,1]");
}

namespace {

std::array<EvalCell, 3> score_movements(const Dataset& truth,
                                        const std::array<std::vector<double>, 3>& predictions) {
  std::array<EvalCell, 3> cells;
  for (int m = 0; m < 3; ++m) {
    const std::vector<double> y = labels_vector(truth, m);
    cells[static_cast<std::size_t>(m)].mae = mae(y, predictions[static_cast<std::size_t>(m)]);
    cells[static_cast<std::size_t>(m)].rmse = rmse(y, predictions[static_cast<std::size_t>(m)]);
    cells[static_cast<std::size_t>(m)].count = y.size();
  }
  return cells;
}

}  // namespace

EvalReport loio_evaluate(const Dataset& dataset, const LoioConfig& config) {
  config.lasso.validate();
  config.boosting.validate();
  config.eval.validate();
  const auto ids = dataset.intersection_ids();
  if (ids.size() < 2) throw UsageError("loio_evaluate: need at least 2 intersections");
  if (!dataset.fully_labeled()) throw DataError("loio_evaluate: dataset must be fully labeled");

  EvalReport report;
  report.models = config.eval.models;
  report.seed = config.seed;

  struct FoldOutput {
    std::vector<EvalReport::Breakdown> rows;
    std::vector<std::string> failures;
  };
  std::vector<FoldOutput> folds(ids.size());

  parallel_for(config.jobs, ids.size(), [&](std::size_t fold) {
    const std::string& held_out = ids[fold];
    Dataset train, truth;
    for (const auto& inst : dataset.instances)
      (inst.intersection_id == held_out ? truth : train).instances.push_back(inst);
    // Labels of the held-out intersection never reach training code.
    const Dataset target_view = truth.without_labels();
    const std::uint64_t fold_seed = derive_seed(config.seed, 0x10000000ULL + fold);

    FeatureSelection selection;
    try {
      selection = select_features(train, config.lasso, derive_seed(fold_seed, 0x5e1));
    } catch (const std::exception& e) {
      for (const auto& model : config.eval.models)
        folds[fold].failures.push_back(held_out + "/" + model + ": selection failed: " + e.what());
      return;
    }

    const Matrix train_x = features_matrix(train, selection.selected_indices);
    const Matrix test_x = features_matrix(truth, selection.selected_indices);

    for (const auto& model_name : config.eval.models) {
      try {
        std::array<std::vector<double>, 3> preds;
        if (model_name == "TL") {
          PipelineConfig pc;
          pc.lasso = config.lasso;
          pc.boosting = config.boosting;
          pc.substitution_fraction = config.substitution_fraction;
          pc.seed = fold_seed;
          pc.jobs = 1;  // folds already run in parallel
          const PipelineResult res = run_pipeline(train, target_view, pc, &selection);
          for (std::size_t i = 0; i < res.predictions.size(); ++i) {
            preds[0].push_back(res.predictions[i].v_lm_hat);
            preds[1].push_back(res.predictions[i].v_tm_hat);
            preds[2].push_back(res.predictions[i].v_rm_hat);
          }
        } else if (model_name == "KNN") {
          for (int m = 0; m < 3; ++m)
            preds[static_cast<std::size_t>(m)] =
                knn_fit_predict(train_x, labels_vector(train, m), test_x, config.eval.knn_k,
                                config.eval.knn_weighting);
        } else if (model_name == "Forest") {
          for (int m = 0; m < 3; ++m) {
            ForestConfig fc;
            fc.n_trees = config.eval.forest_trees;
            fc.tree = config.boosting.tree;
            fc.feature_fraction = config.eval.forest_feature_fraction;
            fc.seed = derive_seed(fold_seed, 0xF0E0 + static_cast<std::uint64_t>(m));
            const Forest forest = forest_fit(train_x, labels_vector(train, m), fc);
            auto& p = preds[static_cast<std::size_t>(m)];
            p.reserve(test_x.rows);
            for (std::size_t i = 0; i < test_x.rows; ++i) p.push_back(forest.predict(test_x.row(i)));
          }
        } else {  // AdaBoost.R2, source-only
          AdaBoostConfig ac;
          ac.iterations = config.boosting.iterations;
          ac.loss = config.boosting.loss;
          ac.tree = config.boosting.tree;
          const Presorted presorted = presort_matrix(train_x);
          for (int m = 0; m < 3; ++m) {
            const std::vector<double> w(train_x.rows, 1.0 / static_cast<double>(train_x.rows));
            const AdaBoostEnsemble ens =
                adaboost_r2_fit(train_x, labels_vector(train, m), w, ac, 0, &presorted);
            auto& p = preds[static_cast<std::size_t>(m)];
            p.reserve(test_x.rows);
            for (std::size_t i = 0; i < test_x.rows; ++i) p.push_back(ens.predict(test_x.row(i)));
          }
        }
        EvalReport::Breakdown row;
        row.intersection = held_out;
        row.model = model_name;
        row.cells = score_movements(truth, preds);
        folds[fold].rows.push_back(std::move(row));
      } catch (const std::exception& e) {
        folds[fold].failures.push_back(held_out + "/" + model_name + ": " + e.what());
        log_warn("loio fold " + held_out + " model " + model_name + " failed: " + e.what());
      }
    }
  });

  for (auto& fold : folds) {
    for (auto& row : fold.rows) report.per_intersection.push_back(std::move(row));
    for (auto& f : fold.failures) report.failures.push_back(std::move(f));
  }

  for (const auto& model : report.models) {
    std::array<EvalCell, 3> agg{};
    std::size_t n_folds = 0;
    for (const auto& row : report.per_intersection) {
      if (row.model != model) continue;
      ++n_folds;
      for (std::size_t m = 0; m < 3; ++m) {
        agg[m].mae += row.cells[m].mae;
        agg[m].rmse += row.cells[m].rmse;
        agg[m].count += row.cells[m].count;
      }
    }
    if (n_folds > 0) {
      for (std::size_t m = 0; m < 3; ++m) {
        agg[m].mae /= static_cast<double>(n_folds);
        agg[m].rmse /= static_cast<double>(n_folds);
      }
    }
    report.summary[model] = agg;
  }
  return report;
}

std::string EvalReport::summary_csv(const std::string& metric) const {
  if (metric != "mae" && metric != "rmse") throw UsageError("metric must be mae or rmse");
  std::string out = "model,left_turn,through,right_turn\n";
  for (const auto& model : models) {
    const auto it = summary.find(model);
    out += model;
    for (std::size_t m = 0; m < 3; ++m) {
      out.push_back(',');
      if (it != summary.end())
        out += format_double(metric == "mae" ? it->second[m].mae : it->second[m].rmse);
    }
    out.push_back('\n');
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["models"] = models;
  j["movements"] = {"left", "through", "right"};
  nlohmann::ordered_json summary_json;
  for (const auto& model : models) {
    const auto it = summary.find(model);
    if (it == summary.end()) continue;
    nlohmann::ordered_json cells;
    for (std::size_t m = 0; m < 3; ++m) {
      cells[kMovementNames[m]] = {{"mae", it->second[m].mae},
                                  {"rmse", it->second[m].rmse},
                                  {"instances", it->second[m].count}};
    }
    summary_json[model] = std::move(cells);
  }
  j["summary"] = std::move(summary_json);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : per_intersection) {
    nlohmann::ordered_json r;
    r["intersection"] = row.intersection;
    r["model"] = row.model;
    for (std::size_t m = 0; m < 3; ++m) {
      r[kMovementNames[m]] = {{"mae", row.cells[m].mae},
                              {"rmse", row.cells[m].rmse},
                              {"instances", row.cells[m].count}};
    }
    rows.push_back(std::move(r));
  }
  j["per_intersection"] = std::move(rows);
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

}  // namespace tmc
