#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tmc/boosting.hpp"
#include "tmc/errors.hpp"
#include "tmc/rng.hpp"

using namespace tmc;

namespace {

// brute-force weighted median: try every value as the answer
double weighted_median_oracle(const std::vector<double>& values,
                              const std::vector<double>& weights) {
  double total = 0.0;
  for (const double w : weights) total += w;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double cum = 0.0;
  for (const std::size_t i : order) {
    cum += weights[i];
    if (cum >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

Matrix ramp_matrix(std::size_t n) {
  Matrix x(n, 1);
  for (std::size_t i = 0; i < n; ++i) x.at(i, 0) = static_cast<double>(i);
  return x;
}

}  // namespace

TEST_CASE("adjusted errors: linear, square, exponential") {
  const std::vector<double> residuals = {0.0, 2.0, 4.0};
  const auto linear = adjusted_errors(residuals, LossKind::kLinear);
  CHECK(linear[0] == doctest::Approx(0.0));
  CHECK(linear[1] == doctest::Approx(0.5));
  CHECK(linear[2] == doctest::Approx(1.0));

  const auto square = adjusted_errors(residuals, LossKind::kSquare);
  CHECK(square[1] == doctest::Approx(0.25));
  CHECK(square[2] == doctest::Approx(1.0));

  const auto expo = adjusted_errors(residuals, LossKind::kExponential);
  CHECK(expo[0] == doctest::Approx(0.0));
  CHECK(expo[2] == doctest::Approx(1.0 - std::exp(-1.0)));

  const auto zeros = adjusted_errors({0.0, 0.0, 0.0}, LossKind::kLinear);
  for (const double e : zeros) CHECK(e == 0.0);

  for (const auto kind : {LossKind::kLinear, LossKind::kSquare, LossKind::kExponential}) {
    Rng rng(2);
    std::vector<double> r(50);
    for (auto& v : r) v = rng.uniform(0.0, 9.0);
    for (const double e : adjusted_errors(r, kind)) {
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
}

TEST_CASE("weighted median basics and oracle agreement") {
  CHECK(weighted_median({1, 2, 3}, {1, 1, 1}) == 2.0);
  CHECK(weighted_median({1, 2, 3}, {0.6, 0.2, 0.2}) == 1.0);
  CHECK_THROWS_AS(weighted_median({}, {}), UsageError);

  Rng rng(3);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> values(6), weights(6);
    for (std::size_t i = 0; i < 6; ++i) {
      values[i] = rng.uniform(-5.0, 5.0);
      weights[i] = rng.uniform(0.01, 2.0);
    }
    CHECK(weighted_median(values, weights) == weighted_median_oracle(values, weights));
  }
}

TEST_CASE("T=1 ensemble equals its single tree") {
  Rng rng(5);
  const std::size_t n = 32;  // weights of 1/32 sum to exactly 1
  Matrix x(n, 2);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.at(i, 0) = rng.uniform();
    x.at(i, 1) = rng.uniform();
    y[i] = 3.0 * x.at(i, 0) + 1.0;
  }
  AdaBoostConfig cfg;
  cfg.iterations = 1;
  cfg.tree.min_samples_leaf = 2;
  const std::vector<double> w(n, 1.0 / 32.0);
  const AdaBoostEnsemble ens = adaboost_r2_fit(x, y, w, cfg);
  REQUIRE(ens.trees.size() == 1);
  const Tree tree = fit_tree(x, y, w, cfg.tree);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(ens.predict(x.row(i)) == std::max(0.0, tree.predict(x.row(i))));
}

TEST_CASE("boosting lowers training MAE over a single stump") {
  Rng rng(7);
  const std::size_t n = 80;
  Matrix x = ramp_matrix(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 10.0 + 0.5 * static_cast<double>(i) + 2.0 * std::sin(0.4 * static_cast<double>(i));

  AdaBoostConfig cfg;
  cfg.iterations = 10;
  cfg.tree.max_depth = 1;
  cfg.tree.min_samples_leaf = 1;
  const std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const AdaBoostEnsemble ens = adaboost_r2_fit(x, y, w, cfg);
  const Tree single = fit_tree(x, y, w, cfg.tree);

  double mae_ens = 0.0, mae_single = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mae_ens += std::abs(ens.predict(x.row(i)) - y[i]);
    mae_single += std::abs(single.predict(x.row(i)) - y[i]);
  }
  CHECK(mae_ens <= mae_single);
  CHECK(ens.trees.size() > 1);
}

TEST_CASE("freezing the whole pool leaves weights untouched") {
  Rng rng(11);
  Matrix x(20, 1);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x.at(i, 0) = rng.uniform();
    y[i] = 2.0 * x.at(i, 0);  // a stump cannot fit this exactly
  }
  // weights staying fixed means every round fits the same tree
  AdaBoostConfig cfg;
  cfg.iterations = 5;
  cfg.tree.max_depth = 1;
  cfg.tree.min_samples_leaf = 1;
  const std::vector<double> w(20, 0.05);
  const AdaBoostEnsemble ens = adaboost_r2_fit(x, y, w, cfg, 20);
  REQUIRE(ens.trees.size() >= 2);
  for (std::size_t t = 1; t < ens.trees.size(); ++t) {
    CHECK(ens.trees[t].nodes[0].feature == ens.trees[0].nodes[0].feature);
    CHECK(ens.trees[t].nodes[0].threshold == ens.trees[0].nodes[0].threshold);
    CHECK(ens.stage_log_weights[t] == ens.stage_log_weights[0]);
  }
}

TEST_CASE("negative raw predictions clamp to zero") {
  Matrix x(8, 1);
  std::vector<double> y(8, -3.0);  // leaves predict -3
  for (std::size_t i = 0; i < 8; ++i) x.at(i, 0) = static_cast<double>(i);
  AdaBoostConfig cfg;
  cfg.iterations = 1;
  const std::vector<double> w(8, 1.0);
  const AdaBoostEnsemble ens = adaboost_r2_fit(x, y, w, cfg);
  CHECK(ens.predict_raw(x.row(0)) == doctest::Approx(-3.0));
  CHECK(ens.predict(x.row(0)) == 0.0);
}

TEST_CASE("three equal-weight trees take the middle prediction") {
  AdaBoostEnsemble ens;
  for (const double v : {10.0, 20.0, 30.0}) {
    Tree t;
    t.n_features = 1;
    t.nodes.push_back(TreeNode{-1, 0.0, -1, -1, v});
    ens.trees.push_back(std::move(t));
    ens.stage_log_weights.push_back(1.0);
  }
  const std::vector<double> x = {0.0};
  CHECK(ens.predict(x) == 20.0);
}

TEST_CASE("solve_beta identity, algebraic oracle and degeneracy") {
  WeightVector w;
  w.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  w.n_source = 2;

  SUBCASE("identity at the current mass") {
    const BetaSolution sol = solve_beta(w, {0.4, 0.9}, w.target_mass());
    CHECK(sol.beta == 1.0);
    CHECK_FALSE(sol.degenerate);
  }
  SUBCASE("hand-solved half-mass case") {
    // beta*(2/3)/(beta*2/3 + 1/3) = 0.5  =>  beta = 0.5
    const BetaSolution sol = solve_beta(w, {1.0, 1.0}, 0.5);
    CHECK(sol.beta == doctest::Approx(0.5).epsilon(1e-8));
    CHECK_FALSE(sol.degenerate);
    const WeightVector next = update_weights(w, {1.0, 1.0}, sol.beta);
    CHECK(next.target_mass() == doctest::Approx(0.5).epsilon(1e-8));
  }
  SUBCASE("all zero source errors cannot move mass") {
    const BetaSolution sol = solve_beta(w, {0.0, 0.0}, 0.5);
    CHECK(sol.beta == 1.0);
    CHECK(sol.degenerate);
  }
  SUBCASE("fraction below current mass is an argument error") {
    CHECK_THROWS_AS(solve_beta(w, {0.5, 0.5}, 0.1), UsageError);
  }
  SUBCASE("full target mass solves exactly at beta zero") {
    const BetaSolution sol = solve_beta(w, {0.5, 1.0}, 1.0);
    CHECK(sol.beta == 0.0);
    CHECK_FALSE(sol.degenerate);
    const WeightVector next = update_weights(w, {0.5, 1.0}, sol.beta);
    CHECK(next.target_mass() == 1.0);
  }
}

TEST_CASE("update_weights keeps the simplex and the source/target ratio rule") {
  Rng rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 3 + rng.uniform_int(5);
    const std::size_t m = 1 + rng.uniform_int(4);
    WeightVector w;
    w.n_source = n;
    w.weights.resize(n + m);
    double sum = 0.0;
    for (auto& v : w.weights) {
      v = rng.uniform(0.01, 1.0);
      sum += v;
    }
    for (auto& v : w.weights) v /= sum;

    std::vector<double> errors(n);
    for (auto& e : errors) e = rng.uniform();
    const double beta = rng.uniform(0.05, 1.0);
    const WeightVector next = update_weights(w, errors, beta);

    double total = 0.0;
    for (const double v : next.weights) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    // source never gains on target: beta^e <= 1
    for (std::size_t i = 0; i < n; ++i)
      CHECK(next.weights[i] / next.weights[n] <= w.weights[i] / w.weights[n] * (1.0 + 1e-12));
  }

  WeightVector w;
  w.weights = {0.5, 0.5};
  w.n_source = 1;
  const WeightVector same = update_weights(w, {0.7}, 1.0);
  CHECK(same.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("schedule fractions hit the stated values") {
  CHECK(schedule_fraction(90, 10, 10, 0) == doctest::Approx(0.1));
  CHECK(schedule_fraction(90, 10, 10, 1) == doctest::Approx(0.2));
  CHECK(schedule_fraction(90, 10, 10, 9) == 1.0);
  CHECK(schedule_fraction(50, 50, 10, 0) == doctest::Approx(0.5));
  CHECK(schedule_fraction(99, 1, 5, 0) == doctest::Approx(0.01));
  CHECK(schedule_fraction(99, 1, 5, 4) == 1.0);
  // S = 1 runs its only stage at the base mass
  CHECK(schedule_fraction(9, 3, 1, 0) == doctest::Approx(0.25));
  // strictly increasing for S >= 2
  for (int t = 1; t < 10; ++t)
    CHECK(schedule_fraction(90, 10, 10, t) > schedule_fraction(90, 10, 10, t - 1));
  CHECK_THROWS_AS(schedule_fraction(5, 5, 0, 0), UsageError);
  CHECK_THROWS_AS(schedule_fraction(5, 5, 3, 3), UsageError);
}

namespace {

struct TinyProblem {
  Matrix xs, xt;
  std::vector<double> ys, yt;
};

TinyProblem tiny_problem(Rng& rng, std::size_t n, std::size_t m) {
  TinyProblem p;
  p.xs = Matrix(n, 2);
  p.xt = Matrix(m, 2);
  p.ys.resize(n);
  p.yt.resize(m);
  for (std::size_t i = 0; i < n; ++i) {
    p.xs.at(i, 0) = rng.uniform(0.0, 10.0);
    p.xs.at(i, 1) = rng.uniform(0.0, 10.0);
    p.ys[i] = 2.0 * p.xs.at(i, 0) + rng.uniform(0.0, 1.0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    p.xt.at(i, 0) = rng.uniform(0.0, 10.0);
    p.xt.at(i, 1) = rng.uniform(0.0, 10.0);
    p.yt[i] = 3.0 * p.xt.at(i, 0) + rng.uniform(0.0, 1.0);
  }
  return p;
}

}  // namespace

TEST_CASE("two_stage_fit: schedule adherence, frozen source, reproducibility") {
  Rng rng(17);
  const TinyProblem p = tiny_problem(rng, 40, 10);
  TwoStageConfig cfg;
  cfg.steps = 6;
  cfg.folds = 2;
  cfg.iterations = 3;
  cfg.tree.max_depth = 2;
  cfg.tree.min_samples_leaf = 1;
  cfg.seed = 99;

  const TrAModel model = two_stage_fit(p.xs, p.ys, p.xt, p.yt, cfg);
  REQUIRE(model.trace.size() == 6);
  REQUIRE(model.stage_models.size() == 6);
  REQUIRE(model.stage_errors.size() == 6);

  for (std::size_t t = 0; t < model.trace.size(); ++t) {
    const auto& trace = model.trace[t];
    double total = 0.0, target = 0.0;
    for (std::size_t i = 0; i < trace.weights_after.size(); ++i) {
      CHECK(trace.weights_after[i] >= 0.0);
      total += trace.weights_after[i];
      if (i >= 40) target += trace.weights_after[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    if (!trace.degenerate)
      CHECK(target == doctest::Approx(schedule_fraction(40, 10, 6, static_cast<int>(t)))
                          .epsilon(1e-6));
  }

  // chosen stage minimizes the CV errors
  for (const double e : model.stage_errors)
    CHECK(model.stage_errors[model.chosen_stage] <= e);

  // identical seed reproduces the trace bit for bit
  const TrAModel again = two_stage_fit(p.xs, p.ys, p.xt, p.yt, cfg);
  CHECK(again.chosen_stage == model.chosen_stage);
  for (std::size_t t = 0; t < model.trace.size(); ++t)
    CHECK(again.trace[t].weights_after == model.trace[t].weights_after);
  CHECK(again.stage_errors == model.stage_errors);
}

TEST_CASE("two_stage_fit argument errors") {
  Rng rng(19);
  const TinyProblem p = tiny_problem(rng, 10, 3);
  TwoStageConfig cfg;
  cfg.folds = 5;  // more folds than target rows
  CHECK_THROWS_AS(two_stage_fit(p.xs, p.ys, p.xt, p.yt, cfg), UsageError);
}

TEST_CASE("no-shift transfer beats or matches target-only boosting") {
  // source drawn from the same process as the target, target data scarce:
  // the chosen stage should let the pooled model beat a target-only fit
  Rng rng(23);
  const std::size_t n = 200, m = 8;
  Matrix xs(n, 1), xt(m, 1);
  std::vector<double> ys(n), yt(m);
  auto f = [](double v) { return 5.0 + 2.0 * v + 8.0 * std::sin(0.8 * v); };
  for (std::size_t i = 0; i < n; ++i) {
    xs.at(i, 0) = rng.uniform(0.0, 10.0);
    ys[i] = f(xs.at(i, 0)) + 0.2 * rng.normal();
  }
  for (std::size_t i = 0; i < m; ++i) {
    xt.at(i, 0) = rng.uniform(0.0, 10.0);
    yt[i] = f(xt.at(i, 0)) + 0.2 * rng.normal();
  }
  Matrix holdout(60, 1);
  std::vector<double> y_holdout(60);
  for (std::size_t i = 0; i < 60; ++i) {
    holdout.at(i, 0) = rng.uniform(0.0, 10.0);
    y_holdout[i] = f(holdout.at(i, 0));
  }

  TwoStageConfig cfg;
  cfg.steps = 5;
  cfg.folds = 2;
  cfg.iterations = 15;
  cfg.tree.max_depth = 5;
  cfg.tree.min_samples_leaf = 2;
  cfg.seed = 7;
  const TrAModel transfer = two_stage_fit(xs, ys, xt, yt, cfg);

  AdaBoostConfig inner;
  inner.iterations = cfg.iterations;
  inner.tree = cfg.tree;
  const std::vector<double> wt(m, 1.0 / static_cast<double>(m));
  const AdaBoostEnsemble target_only = adaboost_r2_fit(xt, yt, wt, inner);

  std::vector<double> pred_transfer(60), pred_target_only(60);
  for (std::size_t i = 0; i < 60; ++i) {
    pred_transfer[i] = transfer.predict(holdout.row(i));
    pred_target_only[i] = target_only.predict(holdout.row(i));
  }
  double rmse_transfer = 0.0, rmse_target_only = 0.0;
  for (std::size_t i = 0; i < 60; ++i) {
    rmse_transfer += std::pow(pred_transfer[i] - y_holdout[i], 2);
    rmse_target_only += std::pow(pred_target_only[i] - y_holdout[i], 2);
  }
  CHECK(std::sqrt(rmse_transfer / 60.0) <= std::sqrt(rmse_target_only / 60.0));
}

TEST_CASE("weight vector validation") {
  WeightVector w;
  w.weights = {0.6, 0.3};
  w.n_source = 1;
  CHECK_THROWS_AS(w.validate(), UsageError);  // sums to 0.9
  w.weights = {0.6, 0.4};
  CHECK_NOTHROW(w.validate());
  w.weights = {1.4, -0.4};
  CHECK_THROWS_AS(w.validate(), UsageError);
}
