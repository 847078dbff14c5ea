#include "icea/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace icea {

namespace {

struct NodeStats {
  double sum = 0.0;
  double sum_sq = 0.0;
  size_t count = 0;
  double sse() const { return sum_sq - sum * sum / static_cast<double>(count); }
  double mean() const { return sum / static_cast<double>(count); }
};

// Sums in value order so the result is independent of row permutation.
NodeStats stats_of(const std::vector<size_t>& rows, std::span<const double> residual) {
  std::vector<double> values;
  values.reserve(rows.size());
  for (size_t i : rows) values.push_back(residual[i]);
  std::sort(values.begin(), values.end());
  NodeStats s;
  s.count = values.size();
  for (double v : values) {
    s.sum += v;
    s.sum_sq += v * v;
  }
  return s;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
public:
  TreeBuilder(const std::vector<std::vector<double>>& columns,
              std::span<const double> residual, const TreeParams& params)
      : columns_(columns), residual_(residual), params_(params) {}

  int build(std::vector<size_t>&& rows, int depth) {
    NodeStats stats = stats_of(rows, residual_);
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[id].value = stats.mean();

    if (depth >= params_.max_depth ||
        rows.size() < 2 * static_cast<size_t>(params_.min_samples_leaf))
      return id;

    SplitChoice split = best_split(rows, stats);
    if (!split.found) return id;

    std::vector<size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    const auto& col = columns_[split.feature];
    for (size_t i : rows)
      (col[i] <= split.threshold ? left_rows : right_rows).push_back(i);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    int left = build(std::move(left_rows), depth + 1);
    int right = build(std::move(right_rows), depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  std::vector<RegressionTree::Node> take() { return std::move(nodes_); }

private:
  SplitChoice best_split(const std::vector<size_t>& rows, const NodeStats& stats) {
    SplitChoice best;
    const size_t n = rows.size();
    const size_t min_leaf = static_cast<size_t>(params_.min_samples_leaf);
    const double node_sse = stats.sse();

    std::vector<std::pair<double, double>> ordered(n);  // (x, residual)
    for (size_t f = 0; f < columns_.size(); ++f) {
      const auto& col = columns_[f];
      for (size_t i = 0; i < n; ++i) ordered[i] = {col[rows[i]], residual_[rows[i]]};
      // Sorting by (x, r) makes the prefix sums a function of the multiset,
      // not of the incoming row order.
      std::sort(ordered.begin(), ordered.end());

      double left_sum = 0.0, left_sum_sq = 0.0;
      for (size_t s = 1; s < n; ++s) {
        left_sum += ordered[s - 1].second;
        left_sum_sq += ordered[s - 1].second * ordered[s - 1].second;
        if (ordered[s - 1].first >= ordered[s].first) continue;  // not distinct
        if (s < min_leaf || n - s < min_leaf) continue;

        const double right_sum = stats.sum - left_sum;
        const double right_sum_sq = stats.sum_sq - left_sum_sq;
        const double sse_left = left_sum_sq - left_sum * left_sum / static_cast<double>(s);
        const double sse_right =
            right_sum_sq - right_sum * right_sum / static_cast<double>(n - s);
        const double gain = node_sse - sse_left - sse_right;
        // Strict improvement keeps the first (lowest feature, lowest
        // threshold) candidate on equal gains.
        if (gain > best.gain) {
          best.found = true;
          best.feature = static_cast<int>(f);
          best.threshold = ordered[s - 1].first + (ordered[s].first - ordered[s - 1].first) / 2.0;
          best.gain = gain;
        }
      }
    }

    if (best.found && (best.gain < params_.min_gain || best.gain <= 0.0))
      best.found = false;
    return best;
  }

  const std::vector<std::vector<double>>& columns_;
  std::span<const double> residual_;
  const TreeParams& params_;
  std::vector<RegressionTree::Node> nodes_;
};

nlohmann::json node_to_json(const std::vector<RegressionTree::Node>& nodes, int id) {
  const auto& n = nodes[id];
  if (n.feature < 0) return {{"type", "leaf"}, {"value", n.value}};
  return {{"type", "split"},
          {"feature", n.feature},
          {"threshold", n.threshold},
          {"left", node_to_json(nodes, n.left)},
          {"right", node_to_json(nodes, n.right)}};
}

int node_from_json(const nlohmann::json& j, std::vector<RegressionTree::Node>& nodes,
                   int& max_feature) {
  const int id = static_cast<int>(nodes.size());
  nodes.push_back({});
  const std::string type = j.at("type").get<std::string>();
  if (type == "leaf") {
    nodes[id].value = j.at("value").get<double>();
  } else if (type == "split") {
    nodes[id].feature = j.at("feature").get<int>();
    nodes[id].threshold = j.at("threshold").get<double>();
    max_feature = std::max(max_feature, nodes[id].feature);
    int left = node_from_json(j.at("left"), nodes, max_feature);
    int right = node_from_json(j.at("right"), nodes, max_feature);
    nodes[id].left = left;
    nodes[id].right = right;
  } else {
    throw std::invalid_argument("RegressionTree::from_json: unknown node type");
  }
  return id;
}

}  // namespace

RegressionTree RegressionTree::fit(const std::vector<std::vector<double>>& columns,
                                   std::span<const double> residual,
                                   const TreeParams& params) {
  if (columns.empty()) throw std::invalid_argument("fit: no feature columns");
  const size_t n = columns.front().size();
  if (n == 0) throw std::invalid_argument("fit: empty data");
  if (residual.size() != n) throw std::invalid_argument("fit: residual length mismatch");
  for (const auto& col : columns) {
    if (col.size() != n) throw std::invalid_argument("fit: ragged columns");
    for (double v : col)
      if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite feature");
  }
  for (double v : residual)
    if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite residual");
  if (params.max_depth < 0 || params.min_samples_leaf < 1 || params.min_gain < 0.0)
    throw std::invalid_argument("fit: invalid TreeParams");

  std::vector<size_t> rows(n);
  for (size_t i = 0; i < n; ++i) rows[i] = i;

  TreeBuilder builder(columns, residual, params);
  builder.build(std::move(rows), 0);

  RegressionTree tree;
  tree.nodes_ = builder.take();
  tree.n_features_ = columns.size();
  return tree;
}

double RegressionTree::predict_row(std::span<const double> row) const {
  if (row.size() < n_features_)
    throw std::invalid_argument("predict_row: row has too few features");
  int id = 0;
  while (nodes_[id].feature >= 0)
    id = row[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left
                                                         : nodes_[id].right;
  return nodes_[id].value;
}

std::vector<double> RegressionTree::predict_columns(
    const std::vector<std::vector<double>>& columns) const {
  if (columns.size() < n_features_)
    throw std::invalid_argument("predict_columns: missing feature columns");
  const size_t n = columns.empty() ? 0 : columns.front().size();
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    int id = 0;
    while (nodes_[id].feature >= 0)
      id = columns[nodes_[id].feature][i] <= nodes_[id].threshold ? nodes_[id].left
                                                                  : nodes_[id].right;
    out[i] = nodes_[id].value;
  }
  return out;
}

int RegressionTree::leaf_count() const {
  int leaves = 0;
  for (const auto& n : nodes_)
    if (n.feature < 0) ++leaves;
  return leaves;
}

std::string RegressionTree::to_json() const {
  return node_to_json(nodes_, 0).dump();
}

RegressionTree RegressionTree::from_json(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RegressionTree tree;
  int max_feature = -1;
  node_from_json(j, tree.nodes_, max_feature);
  tree.n_features_ = static_cast<size_t>(max_feature + 1);
  return tree;
}

void RegressionTree::scale_leaves(double factor) {
  for (auto& n : nodes_)
    if (n.feature < 0) n.value *= factor;
}

}  // namespace icea
