#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mbt/booster.hpp"
#include "mbt/matrix.hpp"

namespace mbt::reconcile {

// Summation structure tying bottom series to their aggregates. Rows are
// ordered top-down (root, inner levels, then the bottom identity
// block); columns are the bottom series in the same traversal order.
struct Hierarchy {
  Matrix s;                         // n_t x n_b, 0/1
  std::vector<std::string> labels;  // one per row of s
  int n_bottom() const { return s.cols(); }
  int n_upper() const { return s.rows() - s.cols(); }
  int n_total() const { return s.rows(); }
};

// spec: ordered (parent -> children) adjacency of a rooted tree whose
// leaves are the bottom series.
Hierarchy build_summation_matrix(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& spec);

// JSON file of the same map: {"total": ["a","b"], "a": [...], ...}
Hierarchy load_hierarchy(const std::string& path);

// ytilde' = S yb'; exactly aggregation-consistent.
Matrix bottom_up(const Matrix& y_hat_bottom, const Hierarchy& h);

// GLS projection S (S' O^+ S)^-1 S' O^+ yhat' with a pseudo-inverted
// error covariance.
Matrix gls_reconcile(const Matrix& y_hat, const Hierarchy& h,
                     const Matrix& omega);

// Covariance estimators accepted in-repo; anything richer is supplied
// as a file.
Matrix omega_identity(int n_t);
Matrix omega_diagonal(const Matrix& errors);
// full sample covariance plus ridge 1e-6 * trace / n_t on the diagonal
Matrix omega_full_ridge(const Matrix& errors);

// max |upper - S_u * bottom| over all rows
double consistency_residual(const Matrix& y, const Hierarchy& h);

// Boosted residual correction on top of the bottom-up reconciliation.
// Features per row t >= 1: [yhat_t, yhat_{t-1} - y_{t-1}, calendar_t];
// target: y_t - bottom_up(yhat_b)_t; response r = S w keeps every
// correction aggregation-consistent.
struct MbtReconcileConfig {
  int n_rounds = 50;
  double learning_rate = 0.2;
  double lambda = 0.0;
  int n_min = 20;
  int max_depth = 4;
  int n_bins = 32;
};

boosting::BoostedModel mbt_reconcile_fit(const Matrix& y_hat, const Matrix& y,
                                         const Matrix& calendar,
                                         const Hierarchy& h,
                                         const MbtReconcileConfig& cfg);

// Reconciles rows 1..T-1 of y_hat (row 0 lacks a prior error and is
// returned as plain bottom-up).
Matrix mbt_reconcile_predict(const boosting::BoostedModel& m,
                             const Matrix& y_hat, const Matrix& y,
                             const Matrix& calendar, const Hierarchy& h);

}  // namespace mbt::reconcile
