#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mbt/loss.hpp"
#include "mbt/matrix.hpp"

namespace mbt::tree {

struct TreeConfig {
  int n_min = 20;
  int max_depth = 6;
  int n_bins = 32;
};

// Per-feature candidate thresholds (strictly increasing, possibly empty
// for constant features).
struct Histogram {
  std::vector<std::vector<double>> edges;
};

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  std::vector<double> w;  // leaf parameters
  int n_rows = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int n_leaves = 0;

  bool is_leaf(int id) const { return nodes[id].feature < 0; }
  // split rule: go left iff x[feature] <= threshold
  int route(std::span<const double> x_row) const;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double loss_after = 0.0;  // loss_a + loss_b
};

// Candidate edges from the rows reaching a node: interpolated quantiles
// at levels {1/n_b,...,(n_b-1)/n_b}, or every midpoint between distinct
// sorted values once those fit within n_b (exhaustive mode).
std::vector<double> bin_edges(std::span<const double> values, int n_bins);

// Contract form over a full feature matrix (rows x n_f).
Histogram compute_bin_edges(const Matrix& x, int n_bins);

// One left-to-right sweep of accumulated stats per feature; returns the
// admissible candidate minimizing loss_a + loss_b strictly below
// parent_loss, ties broken by lower feature index then lower threshold.
// xt holds one feature per row (n_f x N).
std::optional<SplitCandidate> find_best_split(
    const Matrix& xt, std::span<const int> rows, const Matrix& stats,
    const loss::ResponseModel& model, const Histogram& hist, int n_min,
    double parent_loss);

// Recursive histogram split search; stats are the per-row scan rows of
// the ResponseModel. leaf_of_row, when given, receives the leaf node id
// of every training row.
Tree fit_tree(const Matrix& xt, const Matrix& stats,
              const loss::ResponseModel& model, const TreeConfig& cfg,
              std::vector<int>* leaf_of_row = nullptr);

// Routes one row and maps the leaf parameters through the response.
std::vector<double> tree_predict(const Tree& t,
                                 const loss::ResponseModel& model,
                                 std::span<const double> x_row,
                                 std::span<const double> x_lr_row = {});

}  // namespace mbt::tree
