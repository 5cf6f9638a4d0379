#include "mbt/reconcile.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "mbt/errors.hpp"
#include "mbt/kernels.hpp"
#include "mbt/linalg.hpp"

namespace mbt::reconcile {

Hierarchy build_summation_matrix(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& spec) {
  std::map<std::string, std::vector<std::string>> children;
  std::vector<std::string> order;  // insertion order of parents
  std::set<std::string> all, child_set;
  for (const auto& [parent, kids] : spec) {
    if (children.count(parent))
      throw SchemaError("hierarchy: node '" + parent + "' listed twice");
    children[parent] = kids;
    order.push_back(parent);
    all.insert(parent);
    for (const auto& k : kids) {
      if (!child_set.insert(k).second)
        throw SchemaError("hierarchy: node '" + k + "' has multiple parents");
      all.insert(k);
    }
  }
  std::vector<std::string> roots;
  for (const auto& name : all)
    if (!child_set.count(name)) roots.push_back(name);
  if (roots.size() != 1)
    throw SchemaError("hierarchy: expected exactly one root, found " +
                      std::to_string(roots.size()));

  // BFS, preserving child order
  std::vector<std::string> uppers, bottoms;
  std::vector<std::string> queue{roots[0]};
  std::set<std::string> visited;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::string node = queue[qi];
    if (!visited.insert(node).second)
      throw SchemaError("hierarchy: cycle at node '" + node + "'");
    auto it = children.find(node);
    if (it != children.end() && !it->second.empty()) {
      uppers.push_back(node);
      for (const auto& k : it->second) queue.push_back(k);
    } else {
      bottoms.push_back(node);
    }
  }
  if (visited.size() != all.size())
    throw SchemaError("hierarchy: orphan nodes unreachable from the root");
  if (bottoms.empty()) throw SchemaError("hierarchy: no bottom series");

  std::map<std::string, int> bottom_index;
  for (std::size_t i = 0; i < bottoms.size(); ++i)
    bottom_index[bottoms[i]] = static_cast<int>(i);

  // bottom set of each node by recursion
  std::map<std::string, std::vector<int>> coverage;
  std::function<const std::vector<int>&(const std::string&)> cover =
      [&](const std::string& node) -> const std::vector<int>& {
    auto found = coverage.find(node);
    if (found != coverage.end()) return found->second;
    std::vector<int> c;
    auto it = children.find(node);
    if (it == children.end() || it->second.empty()) {
      c.push_back(bottom_index.at(node));
    } else {
      for (const auto& k : it->second) {
        const auto& sub = cover(k);
        c.insert(c.end(), sub.begin(), sub.end());
      }
    }
    return coverage.emplace(node, std::move(c)).first->second;
  };

  const int n_b = static_cast<int>(bottoms.size());
  const int n_u = static_cast<int>(uppers.size());
  Hierarchy h;
  h.s = Matrix(n_u + n_b, n_b);
  for (int u = 0; u < n_u; ++u)
    for (int b : cover(uppers[u])) h.s(u, b) = 1.0;
  for (int b = 0; b < n_b; ++b) h.s(n_u + b, b) = 1.0;
  h.labels = uppers;
  h.labels.insert(h.labels.end(), bottoms.begin(), bottoms.end());
  return h;
}

Hierarchy load_hierarchy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("hierarchy: cannot open '" + path + "'");
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("hierarchy: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("hierarchy: expected a JSON object");
  std::vector<std::pair<std::string, std::vector<std::string>>> spec;
  for (const auto& [key, val] : j.items()) {
    if (!val.is_array())
      throw SchemaError("hierarchy: children of '" + key + "' must be an array");
    spec.emplace_back(key, val.get<std::vector<std::string>>());
  }
  return build_summation_matrix(spec);
}

Matrix bottom_up(const Matrix& y_hat_bottom, const Hierarchy& h) {
  if (y_hat_bottom.cols() != h.n_bottom())
    throw std::runtime_error("bottom_up: width does not match bottom count");
  Matrix out(y_hat_bottom.rows(), h.n_total());
  for (int i = 0; i < y_hat_bottom.rows(); ++i) {
    auto v = matvec(h.s, y_hat_bottom.row_span(i));
    std::copy(v.begin(), v.end(), out.row(i));
  }
  return out;
}

Matrix gls_reconcile(const Matrix& y_hat, const Hierarchy& h,
                     const Matrix& omega) {
  const int n_t = h.n_total();
  if (y_hat.cols() != n_t)
    throw std::runtime_error("gls_reconcile: width does not match hierarchy");
  if (omega.rows() != n_t || omega.cols() != n_t)
    throw std::runtime_error("gls_reconcile: omega must be n_t x n_t");
  const double scale = std::max(1.0, max_abs(omega));
  for (int i = 0; i < n_t; ++i)
    for (int j = i + 1; j < n_t; ++j)
      if (std::fabs(omega(i, j) - omega(j, i)) > 1e-8 * scale)
        throw std::runtime_error("gls_reconcile: omega not symmetric");

  Matrix m = linalg::pinv(omega);
  Matrix sm = matmul(transpose(h.s), m);      // n_b x n_t
  Matrix a = matmul(sm, h.s);                 // n_b x n_b
  Matrix b = matmul(sm, transpose(y_hat));    // n_b x T
  Matrix x;
  try {
    x = linalg::solve(a, b);
  } catch (const std::exception&) {
    throw std::runtime_error("gls_reconcile: S' O^+ S is singular");
  }
  return transpose(matmul(h.s, x));
}

Matrix omega_identity(int n_t) { return Matrix::identity(n_t); }

Matrix omega_diagonal(const Matrix& errors) {
  const int n = errors.rows(), c = errors.cols();
  if (n < 2) throw std::runtime_error("omega_diagonal: need >= 2 rows");
  Matrix o(c, c);
  for (int j = 0; j < c; ++j) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += errors(i, j);
    mean /= n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = errors(i, j) - mean;
      ss += d * d;
    }
    o(j, j) = ss / (n - 1);
  }
  return o;
}

Matrix omega_full_ridge(const Matrix& errors) {
  const int n = errors.rows(), c = errors.cols();
  if (n < 2) throw std::runtime_error("omega_full_ridge: need >= 2 rows");
  std::vector<double> mean(c, 0.0);
  for (int i = 0; i < n; ++i)
    vec::active().add(mean.data(), errors.row(i), mean.size());
  for (auto& v : mean) v /= n;
  Matrix o(c, c);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < c; ++a) {
      double da = errors(i, a) - mean[a];
      for (int b = a; b < c; ++b)
        o(a, b) += da * (errors(i, b) - mean[b]);
    }
  double trace = 0.0;
  for (int a = 0; a < c; ++a) {
    for (int b = a; b < c; ++b) {
      o(a, b) /= (n - 1);
      o(b, a) = o(a, b);
    }
    trace += o(a, a);
  }
  const double ridge = 1e-6 * trace / c;
  for (int a = 0; a < c; ++a) o(a, a) += ridge;
  return o;
}

double consistency_residual(const Matrix& y, const Hierarchy& h) {
  const int n_u = h.n_upper(), n_b = h.n_bottom();
  double worst = 0.0;
  for (int i = 0; i < y.rows(); ++i) {
    const double* row = y.row(i);
    for (int u = 0; u < n_u; ++u) {
      double agg = vec::active().dot(h.s.row(u), row + n_u, n_b);
      worst = std::max(worst, std::fabs(row[u] - agg));
    }
  }
  return worst;
}

namespace {

// rows 1..T-1: [yhat_t, yhat_{t-1} - y_{t-1}, calendar_t]
data::Dataset reconcile_features(const Matrix& y_hat, const Matrix& y,
                                 const Matrix& calendar, const Hierarchy& h) {
  const int t_all = y_hat.rows();
  if (t_all < 2)
    throw std::runtime_error("mbt_reconcile: need >= 2 rows (lagged error)");
  if (y.rows() != t_all || y.cols() != h.n_total() ||
      y_hat.cols() != h.n_total())
    throw std::runtime_error("mbt_reconcile: shape mismatch");
  if (!calendar.empty() && calendar.rows() != t_all)
    throw std::runtime_error("mbt_reconcile: calendar rows mismatch");

  const int n_t = h.n_total(), n_b = h.n_bottom(), n_u = h.n_upper();
  const int n_cal = calendar.empty() ? 0 : calendar.cols();
  data::Dataset d;
  d.x = Matrix(t_all - 1, 2 * n_t + n_cal);
  d.y = Matrix(t_all - 1, n_t);
  for (const auto& l : h.labels) d.feature_names.push_back("base_" + l);
  for (const auto& l : h.labels) d.feature_names.push_back("err_prev_" + l);
  for (int c = 0; c < n_cal; ++c)
    d.feature_names.push_back("cal" + std::to_string(c));
  d.target_names = h.labels;

  for (int t = 1; t < t_all; ++t) {
    double* xr = d.x.row(t - 1);
    for (int j = 0; j < n_t; ++j) xr[j] = y_hat(t, j);
    for (int j = 0; j < n_t; ++j)
      xr[n_t + j] = y_hat(t - 1, j) - y(t - 1, j);
    for (int c = 0; c < n_cal; ++c) xr[2 * n_t + c] = calendar(t, c);
    // residual of the bottom-up reconciliation
    auto bu = matvec(h.s, std::span<const double>(y_hat.row(t) + n_u,
                                                  static_cast<std::size_t>(n_b)));
    for (int j = 0; j < n_t; ++j) d.y(t - 1, j) = y(t, j) - bu[j];
  }
  return d;
}

}  // namespace

boosting::BoostedModel mbt_reconcile_fit(const Matrix& y_hat, const Matrix& y,
                                         const Matrix& calendar,
                                         const Hierarchy& h,
                                         const MbtReconcileConfig& cfg) {
  data::Dataset d = reconcile_features(y_hat, y, calendar, h);
  boosting::BoostConfig bc;
  bc.n_rounds = cfg.n_rounds;
  bc.learning_rate = cfg.learning_rate;
  bc.tree.n_min = cfg.n_min;
  bc.tree.max_depth = cfg.max_depth;
  bc.tree.n_bins = cfg.n_bins;
  bc.spec.kind = loss::Kind::L2Hierarchical;
  bc.spec.lambda = cfg.lambda;
  bc.spec.summation = h.s;
  return boosting::fit(d, bc);
}

Matrix mbt_reconcile_predict(const boosting::BoostedModel& m,
                             const Matrix& y_hat, const Matrix& y,
                             const Matrix& calendar, const Hierarchy& h) {
  data::Dataset d = reconcile_features(y_hat, y, calendar, h);
  Matrix corr = m.predict(d.x);
  const int n_b = h.n_bottom(), n_u = h.n_upper();
  Matrix out(y_hat.rows(), h.n_total());
  for (int t = 0; t < y_hat.rows(); ++t) {
    auto bu = matvec(h.s, std::span<const double>(y_hat.row(t) + n_u,
                                                  static_cast<std::size_t>(n_b)));
    std::copy(bu.begin(), bu.end(), out.row(t));
    if (t >= 1)
      vec::active().add(out.row(t), corr.row(t - 1), bu.size());
  }
  return out;
}

}  // namespace mbt::reconcile
