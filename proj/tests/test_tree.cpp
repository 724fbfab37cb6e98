#include <doctest.h>

#include <cmath>
#include <limits>

#include "tmc/errors.hpp"
#include "tmc/rng.hpp"
#include "tmc/tree.hpp"

using namespace tmc;

namespace {

// Exhaustive split search over every (feature, midpoint) candidate;
// deliberately brute force so the fitter's scan has an independent check.
struct OracleSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

OracleSplit oracle_best_split(const Matrix& x, const std::vector<double>& y,
                              const std::vector<double>& w, int min_samples_leaf) {
  OracleSplit best;
  double wsum = 0.0, wy = 0.0, wyy = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    wsum += w[i];
    wy += w[i] * y[i];
    wyy += w[i] * y[i] * y[i];
  }
  const double node_sse = wyy - wy * wy / wsum;

  for (std::size_t f = 0; f < x.cols; ++f) {
    std::vector<double> values;
    for (std::size_t i = 0; i < x.rows; ++i) values.push_back(x.at(i, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 1; v < values.size(); ++v) {
      const double threshold = 0.5 * (values[v - 1] + values[v]);
      double wl = 0.0, wyl = 0.0, wyyl = 0.0;
      int nl = 0, nr = 0;
      for (std::size_t i = 0; i < x.rows; ++i) {
        if (x.at(i, f) <= threshold) {
          wl += w[i];
          wyl += w[i] * y[i];
          wyyl += w[i] * y[i] * y[i];
          ++nl;
        } else {
          ++nr;
        }
      }
      if (nl < min_samples_leaf || nr < min_samples_leaf) continue;
      const double wr = wsum - wl, wyr = wy - wyl, wyyr = wyy - wyyl;
      if (wl <= 0.0 || wr <= 0.0) continue;
      const double sse = (wyyl - wyl * wyl / wl) + (wyyr - wyr * wyr / wr);
      const double gain = node_sse - sse;
      if (gain > best.gain) {
        best = {true, static_cast<int>(f), threshold, gain};
      }
    }
  }
  return best;
}

double tree_sse_reduction_at_root(const Tree& tree, const Matrix& x, const std::vector<double>& y,
                                  const std::vector<double>& w) {
  double wsum = 0.0, wy = 0.0, wyy = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    wsum += w[i];
    wy += w[i] * y[i];
    wyy += w[i] * y[i] * y[i];
  }
  const double node_sse = wyy - wy * wy / wsum;
  const TreeNode& root = tree.nodes[0];
  REQUIRE(root.feature >= 0);
  double wl = 0.0, wyl = 0.0, wyyl = 0.0, wr = 0.0, wyr = 0.0, wyyr = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    if (x.at(i, static_cast<std::size_t>(root.feature)) <= root.threshold) {
      wl += w[i];
      wyl += w[i] * y[i];
      wyyl += w[i] * y[i] * y[i];
    } else {
      wr += w[i];
      wyr += w[i] * y[i];
      wyyr += w[i] * y[i] * y[i];
    }
  }
  return node_sse - (wyyl - wyl * wyl / wl) - (wyyr - wyr * wyr / wr);
}

}  // namespace

TEST_CASE("constant target fits a single leaf") {
  Matrix x(6, 2);
  Rng rng(3);
  for (auto& v : x.data) v = rng.uniform();
  const std::vector<double> y(6, 4.25);
  const std::vector<double> w(6, 1.0);
  TreeParams params;
  params.min_samples_leaf = 1;
  params.max_depth = 10;
  const Tree tree = fit_tree(x, y, w, params);
  CHECK(tree.is_leaf());
  CHECK(tree.nodes[0].value == doctest::Approx(4.25));
}

TEST_CASE("depth-1 tree finds the step") {
  Matrix x(20, 3);
  std::vector<double> y(20);
  Rng rng(5);
  for (std::size_t i = 0; i < 20; ++i) {
    x.at(i, 0) = rng.uniform();
    x.at(i, 1) = static_cast<double>(i) / 20.0;
    x.at(i, 2) = rng.uniform();
    y[i] = x.at(i, 1) <= 0.5 ? 1.0 : 3.0;
  }
  const std::vector<double> w(20, 1.0);
  TreeParams params;
  params.max_depth = 1;
  params.min_samples_leaf = 1;
  const Tree tree = fit_tree(x, y, w, params);
  REQUIRE_FALSE(tree.is_leaf());
  CHECK(tree.nodes[0].feature == 1);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5).epsilon(0.1));

  std::vector<double> probe = {0.3, 0.2, 0.9};
  CHECK(tree.predict(probe) == doctest::Approx(1.0));
  probe[1] = 0.9;
  CHECK(tree.predict(probe) == doctest::Approx(3.0));
}

TEST_CASE("zero-weight instances are invisible") {
  Rng rng(11);
  Matrix with(12, 2), without(11, 2);
  std::vector<double> y_with(12), y_without(11), w_with(12, 1.0), w_without(11, 1.0);
  for (std::size_t i = 0; i < 11; ++i) {
    without.at(i, 0) = rng.uniform();
    without.at(i, 1) = rng.uniform();
    y_without[i] = std::sin(6.0 * without.at(i, 0));
    with.at(i, 0) = without.at(i, 0);
    with.at(i, 1) = without.at(i, 1);
    y_with[i] = y_without[i];
  }
  with.at(11, 0) = 0.123456;  // a value that would add new candidate thresholds
  with.at(11, 1) = 0.9;
  y_with[11] = 100.0;
  w_with[11] = 0.0;

  TreeParams params;
  params.max_depth = 3;
  params.min_samples_leaf = 2;
  const Tree a = fit_tree(with, y_with, w_with, params);
  const Tree b = fit_tree(without, y_without, w_without, params);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].feature == b.nodes[i].feature);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
    CHECK(a.nodes[i].value == b.nodes[i].value);
  }
}

TEST_CASE("weight scaling leaves the tree unchanged") {
  Rng rng(13);
  Matrix x(30, 3);
  std::vector<double> y(30), w(30);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x.at(i, j) = rng.uniform();
    y[i] = 2.0 * x.at(i, 0) - x.at(i, 2) + 0.1 * rng.normal();
    w[i] = rng.uniform(0.5, 2.0);
  }
  TreeParams params;
  params.max_depth = 4;
  params.min_samples_leaf = 2;
  const Tree base = fit_tree(x, y, w, params);
  for (const double c : {2.0, 0.25, 16.0}) {
    std::vector<double> scaled = w;
    for (auto& v : scaled) v *= c;
    const Tree other = fit_tree(x, y, scaled, params);
    REQUIRE(other.nodes.size() == base.nodes.size());
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      CHECK(other.nodes[i].feature == base.nodes[i].feature);
      CHECK(other.nodes[i].threshold == base.nodes[i].threshold);
      CHECK(other.nodes[i].value == doctest::Approx(base.nodes[i].value).epsilon(1e-12));
    }
  }
}

TEST_CASE("unlimited depth memorizes distinct inputs") {
  Rng rng(17);
  Matrix x(25, 1);
  std::vector<double> y(25);
  for (std::size_t i = 0; i < 25; ++i) {
    x.at(i, 0) = static_cast<double>(i);
    y[i] = rng.normal();
  }
  TreeParams params;
  params.max_depth = 30;
  params.min_samples_leaf = 1;
  const std::vector<double> w(25, 1.0);
  const Tree tree = fit_tree(x, y, w, params);
  for (std::size_t i = 0; i < 25; ++i) CHECK(tree.predict(x.row(i)) == doctest::Approx(y[i]));
}

TEST_CASE("root split matches the exhaustive oracle") {
  Rng rng(19);
  TreeParams params;
  params.max_depth = 1;
  params.min_samples_leaf = 3;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 10 + rng.uniform_int(41);  // up to 50
    Matrix x(n, 4);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 4; ++j) x.at(i, j) = rng.uniform(0.0, 10.0);
      y[i] = rng.uniform(0.0, 5.0);
      w[i] = rng.uniform(0.1, 3.0);
    }
    const OracleSplit oracle = oracle_best_split(x, y, w, params.min_samples_leaf);
    const Tree tree = fit_tree(x, y, w, params);
    if (!oracle.found) {
      CHECK(tree.is_leaf());
      continue;
    }
    REQUIRE_FALSE(tree.is_leaf());
    const double achieved = tree_sse_reduction_at_root(tree, x, y, w);
    CHECK(achieved == doctest::Approx(oracle.gain).epsilon(1e-10));
  }
}

TEST_CASE("prediction is piecewise constant within a leaf cell") {
  Rng rng(23);
  Matrix x(40, 2);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x.at(i, 0) = rng.uniform();
    x.at(i, 1) = rng.uniform();
    y[i] = (x.at(i, 0) > 0.5 ? 2.0 : 0.0) + (x.at(i, 1) > 0.5 ? 1.0 : 0.0);
  }
  const std::vector<double> w(40, 1.0);
  TreeParams params;
  params.max_depth = 2;
  params.min_samples_leaf = 1;
  const Tree tree = fit_tree(x, y, w, params);

  // nudge a probe without crossing any threshold in the tree
  std::vector<double> probe = {0.25, 0.75};
  const double base = tree.predict(probe);
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& node : tree.nodes)
    if (node.feature >= 0)
      min_gap = std::min(min_gap,
                         std::abs(probe[static_cast<std::size_t>(node.feature)] - node.threshold));
  const double eps = 0.25 * min_gap;
  for (const double dx : {-eps, eps}) {
    std::vector<double> moved = probe;
    moved[0] += dx;
    CHECK(tree.predict(moved) == base);
    moved = probe;
    moved[1] += dx;
    CHECK(tree.predict(moved) == base);
  }
}

TEST_CASE("error paths") {
  Matrix x(3, 2);
  std::vector<double> y = {1, 2, 3};
  CHECK_THROWS_AS(fit_tree(x, y, {0.0, 0.0, 0.0}, TreeParams{}), UsageError);
  CHECK_THROWS_AS(fit_tree(x, y, {1.0, -1.0, 1.0}, TreeParams{}), UsageError);
  CHECK_THROWS_AS(fit_tree(x, {1.0, std::nan(""), 3.0}, {1, 1, 1}, TreeParams{}), NumericError);

  TreeParams bad;
  bad.max_depth = 0;
  CHECK_THROWS_AS(fit_tree(x, y, {1, 1, 1}, bad), UsageError);

  const Tree tree = fit_tree(x, y, {1, 1, 1}, TreeParams{});
  const std::vector<double> wrong_dim = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(tree.predict(wrong_dim), UsageError);
}

TEST_CASE("tree JSON round trip preserves predictions") {
  Rng rng(29);
  Matrix x(50, 3);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x.at(i, j) = rng.uniform();
    y[i] = x.at(i, 0) * 3.0 + rng.normal();
  }
  const std::vector<double> w(50, 1.0);
  TreeParams params;
  params.min_samples_leaf = 2;
  const Tree tree = fit_tree(x, y, w, params);
  const Tree copy = tree_from_json(tree_to_json(tree));
  for (std::size_t i = 0; i < 50; ++i) CHECK(copy.predict(x.row(i)) == tree.predict(x.row(i)));
}
