#ifndef ICEA_TREE_HPP
#define ICEA_TREE_HPP

#include <span>
#include <string>
#include <vector>

namespace icea {

struct TreeParams {
  int max_depth = 4;
  int min_samples_leaf = 5;
  double min_gain = 0.0;  // required SSE reduction per split
};

// Least-squares CART regression tree. Split candidates are midpoints between
// consecutive distinct sorted feature values; equal-gain ties resolve to the
// lowest feature index, then the smallest threshold; rows with value equal to
// the threshold route left. Fitting is deterministic under row permutation.
class RegressionTree {
public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;  // leaf mean
    int left = -1;
    int right = -1;
  };

  // columns: one vector per feature, all of length n >= 1.
  static RegressionTree fit(const std::vector<std::vector<double>>& columns,
                            std::span<const double> residual,
                            const TreeParams& params);

  double predict_row(std::span<const double> row) const;
  // Column-major evaluation over the same layout fit() uses.
  std::vector<double> predict_columns(const std::vector<std::vector<double>>& columns) const;

  int leaf_count() const;
  size_t feature_count() const { return n_features_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  // Nested JSON record: {"type":"leaf","value":v} or
  // {"type":"split","feature":f,"threshold":t,"left":...,"right":...}.
  std::string to_json() const;
  static RegressionTree from_json(std::string_view text);

  // Scales every leaf value (shrinkage support).
  void scale_leaves(double factor);

private:
  std::vector<Node> nodes_;
  size_t n_features_ = 0;
};

}  // namespace icea

#endif
