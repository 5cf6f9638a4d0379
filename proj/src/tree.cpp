#include "mbt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbt/kernels.hpp"
#include "mbt/parallel.hpp"

namespace mbt::tree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int bin_of(const std::vector<double>& edges, double x) {
  return static_cast<int>(
      std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
}

}  // namespace

int Tree::route(std::span<const double> x_row) const {
  int id = 0;
  while (!is_leaf(id)) {
    const TreeNode& n = nodes[id];
    id = x_row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return id;
}

std::vector<double> bin_edges(std::span<const double> values, int n_bins) {
  if (n_bins < 2) throw std::runtime_error("bin_edges: n_bins must be >= 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  for (double v : sorted)
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  if (distinct.size() <= 1) return {};  // constant feature: unsplittable
  if (static_cast<int>(distinct.size()) <= n_bins) {
    // exhaustive mode: every midpoint between adjacent distinct values
    std::vector<double> edges(distinct.size() - 1);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
      edges[i] = distinct[i] + 0.5 * (distinct[i + 1] - distinct[i]);
    return edges;
  }
  const std::size_t n = sorted.size();
  std::vector<double> edges;
  for (int b = 1; b < n_bins; ++b) {
    double pos = static_cast<double>(b) / n_bins * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    double q = lo + 1 < n ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
                          : sorted[n - 1];
    if (edges.empty() || q > edges.back()) edges.push_back(q);
  }
  return edges;
}

Histogram compute_bin_edges(const Matrix& x, int n_bins) {
  Histogram h;
  h.edges.resize(x.cols());
  std::vector<double> col(x.rows());
  for (int j = 0; j < x.cols(); ++j) {
    for (int i = 0; i < x.rows(); ++i) col[i] = x(i, j);
    h.edges[j] = bin_edges(col, n_bins);
  }
  return h;
}

std::optional<SplitCandidate> find_best_split(
    const Matrix& xt, std::span<const int> rows, const Matrix& stats,
    const loss::ResponseModel& model, const Histogram& hist, int n_min,
    double parent_loss) {
  const int n_f = xt.rows();
  const auto sd = static_cast<std::size_t>(stats.cols());
  const int n = static_cast<int>(rows.size());
  if (n < 2 * n_min) return std::nullopt;

  std::vector<SplitCandidate> per_feature(n_f);
  std::vector<double> best_loss(n_f, kInf);

  parallel_for(n_f, [&](int j) {
    const std::vector<double>& edges = hist.edges[j];
    if (edges.empty()) return;
    const double* col = xt.row(j);
    const int nb = static_cast<int>(edges.size()) + 1;

    std::vector<double> bin_sum(static_cast<std::size_t>(nb) * sd, 0.0);
    std::vector<int> bin_cnt(nb, 0);
    for (int i : rows) {
      int b = bin_of(edges, col[i]);
      vec::active().add(bin_sum.data() + b * sd, stats.row(i), sd);
      ++bin_cnt[b];
    }

    // suffix sums so the right side is an accumulation, not a
    // subtraction
    std::vector<double> suffix(static_cast<std::size_t>(nb + 1) * sd, 0.0);
    std::vector<int> suffix_cnt(nb + 1, 0);
    for (int b = nb - 1; b >= 0; --b) {
      std::copy(suffix.begin() + (b + 1) * sd, suffix.begin() + (b + 2) * sd,
                suffix.begin() + b * sd);
      vec::active().add(suffix.data() + b * sd, bin_sum.data() + b * sd, sd);
      suffix_cnt[b] = suffix_cnt[b + 1] + bin_cnt[b];
    }

    std::vector<double> left(sd, 0.0);
    int left_cnt = 0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      vec::active().add(left.data(), bin_sum.data() + e * sd, sd);
      left_cnt += bin_cnt[e];
      const int right_cnt = suffix_cnt[e + 1];
      if (left_cnt < n_min || right_cnt < n_min) continue;
      double la = model.scan_loss(left, left_cnt);
      if (la == kInf) continue;
      double lb = model.scan_loss(
          {suffix.data() + (e + 1) * sd, sd}, right_cnt);
      if (lb == kInf) continue;
      double cand = la + lb;
      if (cand < best_loss[j]) {
        best_loss[j] = cand;
        per_feature[j] = {j, edges[e], cand};
      }
    }
  });

  int best = -1;
  for (int j = 0; j < n_f; ++j)
    if (best_loss[j] < (best < 0 ? kInf : best_loss[best])) best = j;
  if (best < 0 || !(best_loss[best] < parent_loss)) return std::nullopt;
  return per_feature[best];
}

namespace {

struct Builder {
  const Matrix& xt;
  const Matrix& stats;
  const loss::ResponseModel& model;
  const TreeConfig& cfg;
  Tree& tree;
  std::vector<int>* leaf_of_row;

  std::vector<double> sum_rows(std::span<const int> rows) const {
    std::vector<double> s(stats.cols(), 0.0);
    for (int i : rows)
      vec::active().add(s.data(), stats.row(i), static_cast<std::size_t>(stats.cols()));
    return s;
  }

  int make_leaf(std::span<const int> rows, std::span<const double> sum,
                const std::string& path) {
    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& n = tree.nodes.back();
    n.n_rows = static_cast<int>(rows.size());
    try {
      n.w = model.optimal_leaf_response(
          model.stats_from_scan(sum, static_cast<double>(rows.size())));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(e.what()) + " (leaf at path '" +
                               (path.empty() ? "root" : path) + "')");
    }
    ++tree.n_leaves;
    if (leaf_of_row)
      for (int i : rows) (*leaf_of_row)[i] = id;
    return id;
  }

  int build(std::vector<int>& rows, int depth, const std::string& path) {
    std::vector<double> sum = sum_rows(rows);
    const auto n = static_cast<int>(rows.size());
    if (depth >= cfg.max_depth || n < 2 * cfg.n_min)
      return make_leaf(rows, sum, path);

    double parent_loss = model.scan_loss(sum, n);
    Histogram hist;
    hist.edges.resize(xt.rows());
    std::vector<double> vals(rows.size());
    for (int j = 0; j < xt.rows(); ++j) {
      const double* col = xt.row(j);
      for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = col[rows[i]];
      hist.edges[j] = bin_edges(vals, cfg.n_bins);
    }
    auto split =
        find_best_split(xt, rows, stats, model, hist, cfg.n_min, parent_loss);
    if (!split) return make_leaf(rows, sum, path);

    std::vector<int> left, right;
    left.reserve(rows.size());
    right.reserve(rows.size());
    const double* col = xt.row(split->feature);
    for (int i : rows)
      (col[i] <= split->threshold ? left : right).push_back(i);

    int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].feature = split->feature;
    tree.nodes[id].threshold = split->threshold;
    tree.nodes[id].n_rows = n;
    rows.clear();
    rows.shrink_to_fit();
    int l = build(left, depth + 1, path + "L");
    int r = build(right, depth + 1, path + "R");
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }
};

}  // namespace

Tree fit_tree(const Matrix& xt, const Matrix& stats,
              const loss::ResponseModel& model, const TreeConfig& cfg,
              std::vector<int>* leaf_of_row) {
  const int n = stats.rows();
  if (n < cfg.n_min)
    throw std::runtime_error("fit_tree: fewer rows than n_min");
  if (xt.cols() != n) throw std::runtime_error("fit_tree: shape mismatch");
  Tree t;
  if (leaf_of_row) leaf_of_row->assign(n, -1);
  std::vector<int> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = i;
  Builder b{xt, stats, model, cfg, t, leaf_of_row};
  b.build(rows, 0, "");
  return t;
}

std::vector<double> tree_predict(const Tree& t,
                                 const loss::ResponseModel& model,
                                 std::span<const double> x_row,
                                 std::span<const double> x_lr_row) {
  const TreeNode& leaf = t.nodes[t.route(x_row)];
  if (model.kind() == loss::Kind::L2Linear) {
    if (x_lr_row.empty())
      throw std::runtime_error("tree_predict: linear response needs x_lr");
    return model.leaf_output_linear(leaf.w, x_lr_row);
  }
  return model.leaf_output(leaf.w);
}

}  // namespace mbt::tree
