#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tmc/matrix.hpp"

namespace tmc {

struct TreeParams {
  int max_depth = 4;
  int min_samples_leaf = 5;
  double min_weight_fraction_leaf = 0.0;

  void validate() const;
};

// Flat storage; feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root, children appear pre-order
  std::size_t n_features = 0;

  double predict(std::span<const double> x) const;
  bool is_leaf() const { return nodes.size() == 1; }
};

// Optional per-node candidate-feature hook. Called once per constructed node
// in pre-order; must return ascending feature indices. The core tree never
// randomizes on its own; the forest baseline injects its subsampling here.
using FeatureSampler = std::function<std::vector<int>()>;

// Per-feature row order by (value, row); depends on the matrix only, so
// ensembles build it once and share it across every weighted fit.
struct Presorted {
  std::vector<std::vector<std::uint32_t>> order;
};

Presorted presort_matrix(const Matrix& x);

// Greedy weighted-SSE CART. Candidate thresholds are midpoints between
// consecutive distinct values; ties in gain resolve to the lowest feature
// index, then the smallest threshold. Zero-weight instances are dropped up
// front, so they cannot influence thresholds or leaf stats.
Tree fit_tree(const Matrix& x, const std::vector<double>& y, const std::vector<double>& weights,
              const TreeParams& params, const FeatureSampler* sampler = nullptr);

Tree fit_tree(const Matrix& x, const Presorted& presorted, const std::vector<double>& y,
              const std::vector<double>& weights, const TreeParams& params,
              const FeatureSampler* sampler = nullptr);

std::string tree_to_json(const Tree& tree);
Tree tree_from_json(const std::string& text);

}  // namespace tmc
