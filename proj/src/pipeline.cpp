#include "tmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmc/errors.hpp"
#include "tmc/log.hpp"
#include "tmc/parallel.hpp"
#include "tmc/rng.hpp"

namespace tmc {

PearsonResult pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("pearson: length mismatch");
  if (a.size() < 2) throw UsageError("pearson: need at least 2 points");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};
  return {sab / std::sqrt(saa * sbb), false};
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

ProfileMap build_profiles(const Dataset& dataset, const std::string& intersection_id,
                          const std::vector<int>& selected_vars) {
  const auto rows = dataset.indices_of(intersection_id);
  if (rows.empty())
    throw DataError("build_profiles: intersection '" + intersection_id + "' not in dataset");

  ProfileMap out;
  for (const int v : selected_vars) {
    if (v < 0 || v >= static_cast<int>(kNumVars))
      throw UsageError("build_profiles: bad variable index " + std::to_string(v));
    if (variable_is_static(static_cast<Var>(v))) continue;

    ProfileVector profile;
    std::array<double, kNumPeakBins> sum{};
    std::array<std::size_t, kNumPeakBins> count{};
    for (const std::size_t i : rows) {
      const auto& inst = dataset.instances[i];
      const std::size_t bin = static_cast<std::size_t>(inst.interval_index);
      sum[bin] += inst.features[static_cast<std::size_t>(v)];
      count[bin] += 1;
    }
    for (std::size_t b = 0; b < kNumPeakBins; ++b) {
      if (count[b] > 0) {
        profile.mean[b] = sum[b] / static_cast<double>(count[b]);
        profile.present[b] = true;
      }
    }
    out.emplace(v, profile);
  }
  return out;
}

MatchResult match_intersections(const Dataset& source, const Dataset& target,
                                const std::string& target_id,
                                const std::vector<int>& selected_vars) {
  if (source.empty()) throw UsageError("match_intersections: empty source dataset");
  const ProfileMap target_profiles = build_profiles(target, target_id, selected_vars);

  MatchResult result;
  result.target_id = target_id;
  for (const auto& source_id : source.intersection_ids()) {
    const ProfileMap source_profiles = build_profiles(source, source_id, selected_vars);
    double score = 0.0;
    std::size_t common_bins = 0;
    for (const auto& [var, sp] : source_profiles) {
      const auto it = target_profiles.find(var);
      if (it == target_profiles.end()) continue;
      std::vector<double> a, b;
      for (std::size_t bin = 0; bin < kNumPeakBins; ++bin) {
        if (sp.present[bin] && it->second.present[bin]) {
          a.push_back(sp.mean[bin]);
          b.push_back(it->second.mean[bin]);
        }
      }
      common_bins += a.size();
      if (a.size() < 2) continue;  // degenerate variable contributes 0
      const PearsonResult r = pearson(a, b);
      if (!r.degenerate) score += r.r;
    }
    if (common_bins == 0) continue;  // nothing comparable for this candidate
    result.ranking.emplace_back(source_id, score);
  }
  if (result.ranking.empty())
    throw DataError("match_intersections: no common bins between '" + target_id +
                    "' and any source intersection");

  std::sort(result.ranking.begin(), result.ranking.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return result;
}

Substitution substitute_target(const Dataset& matched_source, const Dataset& target_features,
                               const std::vector<int>& vars, double fraction) {
  if (matched_source.empty()) throw UsageError("substitute_target: empty matched source");
  if (target_features.empty()) throw UsageError("substitute_target: empty target");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw UsageError("substitute_target: fraction must be in (0,1]");
  if (vars.empty()) throw UsageError("substitute_target: no variables given");

  const std::size_t n = matched_source.size();
  const std::size_t k = target_features.size();
  const std::size_t q = vars.size();

  // z-scores against the combined source+target statistics
  std::vector<double> mean(q, 0.0), sd(q, 0.0);
  const double total = static_cast<double>(n + k);
  auto value_at = [&](std::size_t row, std::size_t j) {
    const auto& inst = row < n ? matched_source.instances[row]
                               : target_features.instances[row - n];
    return inst.features[static_cast<std::size_t>(vars[j])];
  };
  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t i = 0; i < n + k; ++i) mean[j] += value_at(i, j);
    mean[j] /= total;
    double ss = 0.0;
    for (std::size_t i = 0; i < n + k; ++i) {
      const double d = value_at(i, j) - mean[j];
      ss += d * d;
    }
    sd[j] = total > 1.0 ? std::sqrt(ss / (total - 1.0)) : 0.0;
  }
  auto zvec = [&](std::size_t row) {
    std::vector<double> z(q, 0.0);
    for (std::size_t j = 0; j < q; ++j)
      if (sd[j] > 0.0) z[j] = (value_at(row, j) - mean[j]) / sd[j];
    return z;
  };

  std::vector<double> centroid(q, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const auto z = zvec(n + i);
    for (std::size_t j = 0; j < q; ++j) centroid[j] += z[j];
  }
  for (auto& c : centroid) c /= static_cast<double>(k);
  double centroid_norm = 0.0;
  for (const double c : centroid) centroid_norm += c * c;
  centroid_norm = std::sqrt(centroid_norm);

  Substitution sub;
  sub.similarities.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = zvec(i);
    double norm = 0.0;
    for (const double v : z) norm += v * v;
    if (norm == 0.0 || centroid_norm == 0.0) {
      sub.degenerate = true;
      sub.similarities[i] = 0.0;
    } else {
      sub.similarities[i] = cosine_similarity(z, centroid);
    }
  }

  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sub.similarities[a] > sub.similarities[b];
  });
  sub.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  sub.threshold = sub.similarities[sub.indices.back()];
  return sub;
}

void PipelineConfig::validate() const {
  lasso.validate();
  boosting.validate();
  if (!(substitution_fraction > 0.0) || substitution_fraction > 1.0)
    throw UsageError("matching.substitution_fraction must be in (0,1]");
}

namespace {

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.instances.reserve(rows.size());
  for (const std::size_t i : rows) out.instances.push_back(dataset.instances[i]);
  return out;
}

}  // namespace

PipelineResult run_pipeline(const Dataset& source, const Dataset& target,
                            const PipelineConfig& config,
                            const FeatureSelection* precomputed_selection) {
  config.validate();
  if (source.empty()) throw UsageError("pipeline: empty source dataset");
  if (target.empty()) throw UsageError("pipeline: empty target dataset");
  if (!source.fully_labeled()) throw DataError("pipeline: source dataset must be fully labeled");

  PipelineResult result;
  try {
    result.selection = precomputed_selection != nullptr
                           ? *precomputed_selection
                           : select_features(source, config.lasso, derive_seed(config.seed, 0x5e1));
  } catch (const std::exception& e) {
    throw DataError(std::string("pipeline stage feature-selection: ") + e.what());
  }
  const std::vector<int>& sel = result.selection.selected_indices;
  if (sel.empty()) throw DataError("pipeline stage feature-selection: no variables selected");

  const auto target_ids = target.intersection_ids();
  result.plans.resize(target_ids.size());
  result.predictions.resize(target.size());

  parallel_for(config.jobs, target_ids.size(), [&](std::size_t ti) {
    const std::string& tid = target_ids[ti];
    TransferPlan plan;
    plan.target_intersection = tid;

    try {
      plan.match = match_intersections(source, target, tid, sel);
    } catch (const std::exception& e) {
      throw DataError("pipeline stage matching (" + tid + "): " + e.what());
    }

    const auto matched_rows = source.indices_of(plan.match.chosen());
    const Dataset matched = subset(source, matched_rows);
    const auto target_rows = target.indices_of(tid);
    const Dataset target_slice = subset(target, target_rows);

    Substitution sub;
    try {
      sub = substitute_target(matched, target_slice, sel, config.substitution_fraction);
    } catch (const std::exception& e) {
      throw DataError("pipeline stage substitution (" + tid + "): " + e.what());
    }
    plan.substitute_indices = sub.indices;
    plan.substitution_threshold = sub.threshold;

    // D_S: every source-pool instance except the substituted rows;
    // D': the substituted rows standing in for labeled target data.
    std::vector<bool> substituted(source.size(), false);
    for (const std::size_t local : sub.indices) substituted[matched_rows[local]] = true;
    std::vector<std::size_t> keep_rows, sub_rows;
    for (std::size_t i = 0; i < source.size(); ++i)
      (substituted[i] ? sub_rows : keep_rows).push_back(i);

    const Dataset train_source = subset(source, keep_rows);
    const Dataset train_target = subset(source, sub_rows);
    const Matrix xs = features_matrix(train_source, sel);
    const Matrix xt = features_matrix(train_target, sel);

    for (int movement = 0; movement < 3; ++movement) {
      TwoStageConfig stage_cfg = config.boosting;
      stage_cfg.seed = derive_seed(config.seed, 0xB005u + ti * 8 + static_cast<std::size_t>(movement));
      stage_cfg.jobs = config.jobs;
      try {
        plan.models[static_cast<std::size_t>(movement)] =
            two_stage_fit(xs, labels_vector(train_source, movement), xt,
                          labels_vector(train_target, movement), stage_cfg);
      } catch (const std::exception& e) {
        throw DataError("pipeline stage training (" + tid + ", " +
                        kMovementNames[static_cast<std::size_t>(movement)] + "): " + e.what());
      }
    }

    const Matrix tx = features_matrix(target_slice, sel);
    for (std::size_t r = 0; r < target_rows.size(); ++r) {
      const auto& inst = target.instances[target_rows[r]];
      PredictionRow row;
      row.intersection_id = inst.intersection_id;
      row.approach_id = inst.approach_id;
      row.day_index = inst.day_index;
      row.interval_index = inst.interval_index;
      row.v_lm_hat = plan.models[0].predict(tx.row(r));
      row.v_tm_hat = plan.models[1].predict(tx.row(r));
      row.v_rm_hat = plan.models[2].predict(tx.row(r));
      result.predictions[target_rows[r]] = std::move(row);
    }
    result.plans[ti] = std::move(plan);
  });

  return result;
}

}  // namespace tmc
