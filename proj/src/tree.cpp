#include "tmc/tree.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tmc/errors.hpp"

namespace tmc {

void TreeParams::validate() const {
  if (max_depth < 1) throw UsageError("tree.max_depth must be >= 1");
  if (min_samples_leaf < 1) throw UsageError("tree.min_samples_leaf must be >= 1");
  if (min_weight_fraction_leaf < 0.0 || min_weight_fraction_leaf > 0.5)
    throw UsageError("tree.min_weight_fraction_leaf must be in [0, 0.5]");
}

double Tree::predict(std::span<const double> x) const {
  if (x.size() != n_features)
    throw UsageError("prediction input has " + std::to_string(x.size()) +
                     " features, tree expects " + std::to_string(n_features));
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

struct Builder {
  const Matrix& x;
  const std::vector<double>& y;
  const std::vector<double>& w;
  const TreeParams& params;
  const FeatureSampler* sampler;
  double root_weight = 0.0;
  Tree tree;

  // members must be in ascending original-index order; sorted[f] holds the
  // same members ordered by (value, index) for feature f.
  int build(std::vector<std::size_t>& members,
            std::vector<std::vector<std::size_t>>& sorted, int depth) {
    double wsum = 0.0, wy = 0.0, wyy = 0.0;
    for (const std::size_t i : members) {
      wsum += w[i];
      wy += w[i] * y[i];
      wyy += w[i] * y[i] * y[i];
    }
    const double mean = wy / wsum;
    const double node_sse = wyy - wy * wy / wsum;

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.back().value = mean;

    if (depth >= params.max_depth ||
        members.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf) ||
        node_sse <= 1e-12 * std::max(1.0, std::abs(wyy)))
      return node_index;

    std::vector<int> candidates;
    if (sampler != nullptr) {
      candidates = (*sampler)();
    } else {
      candidates.resize(x.cols);
      for (std::size_t f = 0; f < x.cols; ++f) candidates[f] = static_cast<int>(f);
    }

    const double min_child_weight = params.min_weight_fraction_leaf * root_weight;
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;

    for (const int f : candidates) {
      const auto& order = sorted[static_cast<std::size_t>(f)];
      double wl = 0.0, wyl = 0.0;
      for (std::size_t k = 1; k < order.size(); ++k) {
        const std::size_t prev = order[k - 1];
        wl += w[prev];
        wyl += w[prev] * y[prev];
        const double v_prev = x.at(prev, static_cast<std::size_t>(f));
        const double v_next = x.at(order[k], static_cast<std::size_t>(f));
        if (v_next == v_prev) continue;  // split only between distinct values
        if (k < static_cast<std::size_t>(params.min_samples_leaf) ||
            order.size() - k < static_cast<std::size_t>(params.min_samples_leaf))
          continue;
        const double wr = wsum - wl;
        if (wl < min_child_weight || wr < min_child_weight) continue;
        const double wyr = wy - wyl;
        const double gain = wyl * wyl / wl + wyr * wyr / wr - wy * wy / wsum;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (v_prev + v_next);
        }
      }
    }

    if (best_feature < 0) return node_index;

    const std::size_t bf = static_cast<std::size_t>(best_feature);
    std::vector<std::size_t> left_members, right_members;
    for (const std::size_t i : members)
      (x.at(i, bf) <= best_threshold ? left_members : right_members).push_back(i);
    members.clear();
    members.shrink_to_fit();

    std::vector<std::vector<std::size_t>> left_sorted(sorted.size()), right_sorted(sorted.size());
    for (std::size_t f = 0; f < sorted.size(); ++f) {
      left_sorted[f].reserve(left_members.size());
      right_sorted[f].reserve(right_members.size());
      for (const std::size_t i : sorted[f])
        (x.at(i, bf) <= best_threshold ? left_sorted[f] : right_sorted[f]).push_back(i);
      sorted[f].clear();
      sorted[f].shrink_to_fit();
    }

    tree.nodes[static_cast<std::size_t>(node_index)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(node_index)].threshold = best_threshold;
    const int left = build(left_members, left_sorted, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_index)].left = left;
    const int right = build(right_members, right_sorted, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  }
};

}  // namespace

Presorted presort_matrix(const Matrix& x) {
  Presorted p;
  p.order.resize(x.cols);
  for (std::size_t f = 0; f < x.cols; ++f) {
    auto& order = p.order[f];
    order.resize(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = x.at(a, f), vb = x.at(b, f);
      return va < vb || (va == vb && a < b);
    });
  }
  return p;
}

Tree fit_tree(const Matrix& x, const Presorted& presorted, const std::vector<double>& y,
              const std::vector<double>& weights, const TreeParams& params,
              const FeatureSampler* sampler) {
  params.validate();
  if (x.rows == 0 || x.rows != y.size() || x.rows != weights.size())
    throw UsageError("fit_tree: dimension mismatch");
  if (presorted.order.size() != x.cols) throw UsageError("fit_tree: presort mismatch");
  for (const double v : x.data)
    if (std::isnan(v)) throw NumericError("fit_tree: NaN in predictors");
  for (const double v : y)
    if (std::isnan(v)) throw NumericError("fit_tree: NaN in targets");
  double total = 0.0;
  for (const double v : weights) {
    if (std::isnan(v)) throw NumericError("fit_tree: NaN in weights");
    if (v < 0.0) throw UsageError("fit_tree: negative weight");
    total += v;
  }
  if (!(total > 0.0)) throw UsageError("fit_tree: weights sum to zero");

  std::vector<std::size_t> members;
  members.reserve(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    if (weights[i] > 0.0) members.push_back(i);

  std::vector<std::vector<std::size_t>> sorted(x.cols);
  for (std::size_t f = 0; f < x.cols; ++f) {
    sorted[f].reserve(members.size());
    for (const std::uint32_t i : presorted.order[f])
      if (weights[i] > 0.0) sorted[f].push_back(i);
  }

  Builder builder{x, y, weights, params, sampler, 0.0, Tree{}};
  for (const std::size_t i : members) builder.root_weight += weights[i];
  builder.tree.n_features = x.cols;
  builder.build(members, sorted, 0);
  return builder.tree;
}

Tree fit_tree(const Matrix& x, const std::vector<double>& y, const std::vector<double>& weights,
              const TreeParams& params, const FeatureSampler* sampler) {
  return fit_tree(x, presort_matrix(x), y, weights, params, sampler);
}

namespace {

nlohmann::ordered_json node_to_json(const Tree& tree, int index) {
  const TreeNode& nd = tree.nodes[static_cast<std::size_t>(index)];
  if (nd.feature < 0) return nlohmann::ordered_json{{"value", nd.value}};
  nlohmann::ordered_json j;
  j["feature"] = nd.feature;
  j["threshold"] = nd.threshold;
  j["left"] = node_to_json(tree, nd.left);
  j["right"] = node_to_json(tree, nd.right);
  return j;
}

int node_from_json(const nlohmann::json& j, Tree& tree) {
  const int index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("value")) {
    tree.nodes[static_cast<std::size_t>(index)].value = j.at("value").get<double>();
    return index;
  }
  tree.nodes[static_cast<std::size_t>(index)].feature = j.at("feature").get<int>();
  tree.nodes[static_cast<std::size_t>(index)].threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), tree);
  tree.nodes[static_cast<std::size_t>(index)].left = left;
  const int right = node_from_json(j.at("right"), tree);
  tree.nodes[static_cast<std::size_t>(index)].right = right;
  return index;
}

}  // namespace

std::string tree_to_json(const Tree& tree) {
  nlohmann::ordered_json j;
  j["n_features"] = tree.n_features;
  j["root"] = node_to_json(tree, 0);
  return j.dump();
}

Tree tree_from_json(const std::string& text) {
  Tree tree;
  try {
    const auto j = nlohmann::json::parse(text);
    tree.n_features = j.at("n_features").get<std::size_t>();
    node_from_json(j.at("root"), tree);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("tree JSON error: ") + e.what());
  }
  return tree;
}

}  // namespace tmc
