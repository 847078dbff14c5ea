#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "icea/rng.hpp"
#include "icea/tree.hpp"

using icea::CounterRng;
using icea::RegressionTree;
using icea::TreeParams;

namespace {

double training_sse(const RegressionTree& tree,
                    const std::vector<std::vector<double>>& cols,
                    const std::vector<double>& r) {
  std::vector<double> pred = tree.predict_columns(cols);
  double sse = 0.0;
  for (size_t i = 0; i < r.size(); ++i) sse += (r[i] - pred[i]) * (r[i] - pred[i]);
  return sse;
}

double single_leaf_sse(const std::vector<double>& r) {
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double sse = 0.0;
  for (double v : r) sse += (v - mean) * (v - mean);
  return sse;
}

}  // namespace

TEST_CASE("constant residual collapses to a single leaf") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3, 4, 5}};
  std::vector<double> r(6, 3.25);
  RegressionTree t = RegressionTree::fit(cols, r, {4, 1, 0.0});
  CHECK(t.leaf_count() == 1);
  CHECK(t.predict_row(std::vector<double>{2.0}) == 3.25);
}

TEST_CASE("step function splits at the midpoint between distinct values") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}};
  std::vector<double> r = {0, 0, 5, 5};
  RegressionTree t = RegressionTree::fit(cols, r, {1, 1, 0.0});
  REQUIRE(t.leaf_count() == 2);
  const auto& root = t.nodes()[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold > 1.0);
  CHECK(root.threshold < 2.0);
  CHECK(training_sse(t, cols, r) == 0.0);
  CHECK(t.predict_row(std::vector<double>{0.5}) == 0.0);
  CHECK(t.predict_row(std::vector<double>{3.0}) == 5.0);
  // a row exactly at the threshold routes left
  CHECK(t.predict_row(std::vector<double>{root.threshold}) == 0.0);
}

TEST_CASE("max_depth 0 yields the mean leaf") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}};
  std::vector<double> r = {1, 2, 3, 6};
  RegressionTree t = RegressionTree::fit(cols, r, {0, 1, 0.0});
  CHECK(t.leaf_count() == 1);
  CHECK(t.predict_row(std::vector<double>{9.0}) == 3.0);
}

TEST_CASE("tree size counts leaves") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}};
  std::vector<double> r = {0, 1, 10, 11};
  RegressionTree t = RegressionTree::fit(cols, r, {2, 1, 0.0});
  CHECK(t.leaf_count() == 4);  // complete depth-2 tree on 4 distinct steps
}

TEST_CASE("fit validates inputs") {
  std::vector<std::vector<double>> cols = {{0, 1}};
  std::vector<double> r = {0, 1};
  CHECK_THROWS_AS(RegressionTree::fit({}, r, {}), std::invalid_argument);
  CHECK_THROWS_AS(RegressionTree::fit({{}}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(RegressionTree::fit(cols, std::vector<double>{1.0}, {}),
                  std::invalid_argument);
  std::vector<double> bad = {0.0, std::nan("")};
  CHECK_THROWS_AS(RegressionTree::fit(cols, bad, {}), std::invalid_argument);
  CHECK_THROWS_AS(RegressionTree::fit({{0.0, INFINITY}}, r, {}), std::invalid_argument);
  CHECK_THROWS_AS(RegressionTree::fit(cols, r, {-1, 1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(RegressionTree::fit(cols, r, {1, 0, 0.0}), std::invalid_argument);
}

TEST_CASE("predict rejects short rows") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}, {5, 6, 7, 8}};
  std::vector<double> r = {0, 0, 5, 5};
  RegressionTree t = RegressionTree::fit(cols, r, {2, 1, 0.0});
  CHECK_THROWS_AS(t.predict_row(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("fitting never loses to the single-leaf baseline") {
  CounterRng rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const size_t n = 40 + rng.next_below(60);
    std::vector<std::vector<double>> cols(2, std::vector<double>(n));
    std::vector<double> r(n);
    for (size_t i = 0; i < n; ++i) {
      cols[0][i] = rng.next_uniform(-2, 2);
      cols[1][i] = rng.next_uniform(-2, 2);
      r[i] = std::sin(cols[0][i]) + 0.3 * cols[1][i] + 0.1 * rng.next_normal();
    }
    RegressionTree t = RegressionTree::fit(cols, r, {3, 4, 0.0});
    CHECK(training_sse(t, cols, r) <= single_leaf_sse(r) + 1e-9);
  }
}

TEST_CASE("row permutation yields the identical tree") {
  CounterRng rng(102);
  const size_t n = 64;
  std::vector<std::vector<double>> cols(2, std::vector<double>(n));
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) {
    // dyadic values sum exactly in any order
    cols[0][i] = static_cast<double>(rng.next_below(32)) / 4.0;
    cols[1][i] = static_cast<double>(rng.next_below(32)) / 8.0;
    r[i] = static_cast<double>(rng.next_below(64)) / 2.0 - 16.0;
  }
  RegressionTree a = RegressionTree::fit(cols, r, {4, 2, 0.0});

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
  std::vector<std::vector<double>> cols_p(2, std::vector<double>(n));
  std::vector<double> r_p(n);
  for (size_t i = 0; i < n; ++i) {
    cols_p[0][i] = cols[0][order[i]];
    cols_p[1][i] = cols[1][order[i]];
    r_p[i] = r[order[i]];
  }
  RegressionTree b = RegressionTree::fit(cols_p, r_p, {4, 2, 0.0});

  REQUIRE(a.nodes().size() == b.nodes().size());
  for (size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].feature == b.nodes()[i].feature);
    CHECK(a.nodes()[i].threshold == b.nodes()[i].threshold);
    CHECK(a.nodes()[i].value == b.nodes()[i].value);
  }
}

TEST_CASE("1-d residual that is a function of x is fit exactly") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3, 4, 5, 6, 7}};

  // nested steps keep the greedy splits balanced, so depth log2(k) suffices
  std::vector<double> balanced = {0, 1, 8, 9, 64, 65, 72, 73};
  RegressionTree t1 = RegressionTree::fit(cols, balanced, {3, 1, 0.0});
  CHECK(training_sse(t1, cols, balanced) == 0.0);

  // for arbitrary residuals greedy splits can chain, but depth k-1 always
  // reaches zero SSE with min_samples_leaf 1 and min_gain 0
  std::vector<double> r = {3, -1, 4, 1, -5, 9, 2, 6};
  RegressionTree t2 = RegressionTree::fit(cols, r, {7, 1, 0.0});
  CHECK(training_sse(t2, cols, r) == 0.0);
}

TEST_CASE("min_gain rejects weak splits") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}};
  std::vector<double> r = {0.0, 0.1, 0.0, 0.1};  // best split gain is tiny
  RegressionTree t = RegressionTree::fit(cols, r, {2, 1, 1.0});
  CHECK(t.leaf_count() == 1);
}

TEST_CASE("json round-trip") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}, {0.5, 0.25, 0.125, 0.75}};
  std::vector<double> r = {0, 1, 10, 11};
  RegressionTree t = RegressionTree::fit(cols, r, {2, 1, 0.0});
  RegressionTree back = RegressionTree::from_json(t.to_json());
  CHECK(back.to_json() == t.to_json());
  for (double x = -1.0; x <= 4.0; x += 0.25) {
    std::vector<double> row = {x, 0.5};
    CHECK(back.predict_row(row) == t.predict_row(row));
  }
  CHECK_THROWS(RegressionTree::from_json("{\"type\":\"what\"}"));
}

TEST_CASE("scale_leaves applies shrinkage") {
  std::vector<std::vector<double>> cols = {{0, 1, 2, 3}};
  std::vector<double> r = {0, 0, 5, 5};
  RegressionTree t = RegressionTree::fit(cols, r, {1, 1, 0.0});
  t.scale_leaves(0.1);
  CHECK(t.predict_row(std::vector<double>{3.0}) == 0.5);
}
