#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mbt/linalg.hpp"
#include "mbt/loss_spec.hpp"
#include "mbt/matrix.hpp"

namespace mbt::loss {

// Accumulated per-leaf statistics, additive over any partition of the
// leaf's rows. Members in use depend on the kind:
//   L2 kinds          g (parameter space), count
//   quantile smoothed g, h_diag
//   quantile linquad  neg_count/neg_sum/pos_sum per coordinate, plus the
//                     smoothed g/h_diag as the one-sided fallback
//   linear            gram = accumulated x_lr'x_lr, g = x_lr' * grad
struct LeafStats {
  std::vector<double> g;
  std::vector<double> h_diag;
  std::vector<double> neg_count, neg_sum, pos_sum;
  std::vector<double> gram;
  double count = 0.0;
};

// A LossResponseSpec bound to dataset dimensions. Holds the basis (P or
// S) and the one-time eigendecomposition that turns every leaf solve
// (Lambda + H)^-1 into a diagonal rescale.
class ResponseModel {
 public:
  static ResponseModel prepare(const LossResponseSpec& spec, int n_t, int n_p);

  const LossResponseSpec& spec() const { return spec_; }
  Kind kind() const { return spec_.kind; }
  int n_t() const { return n_t_; }
  int n_p() const { return n_p_; }
  int out_dim() const;    // model/prediction width
  int param_dim() const;  // leaf parameter width n_r
  int stat_dim() const;   // scan-stat row width

  // residual matrix (N x out_dim) from targets and current prediction
  Matrix residuals(const Matrix& y, const Matrix& f) const;

  // Per-row scan statistics from the residuals; x_lr required for the
  // linear kind.
  Matrix compute_row_stats(const Matrix& residual, const Matrix* x_lr) const;

  // Loss of a would-be leaf from summed scan stats. Returns +inf when
  // the candidate is not evaluable. Equals optimal_leaf_loss on the
  // corresponding LeafStats.
  double scan_loss(std::span<const double> stat_sum, double count) const;

  LeafStats stats_from_scan(std::span<const double> stat_sum, double count) const;

  // w* = -(Lambda + H)^{-1} G via the cached factorization.
  std::vector<double> optimal_leaf_response(const LeafStats& stats) const;
  // -1/2 G'(Lambda + H)^{-1} G
  double optimal_leaf_loss(const LeafStats& stats) const;

  // r(w): constant per leaf for every kind except linear
  std::vector<double> leaf_output(std::span<const double> w) const;
  std::vector<double> leaf_output_linear(std::span<const double> w,
                                         std::span<const double> x_lr_row) const;

  const Matrix& basis() const { return basis_; }
  const linalg::EigenCache& cache() const { return cache_; }
  std::span<const double> tau_per_coord() const { return tau_per_coord_; }

  // leaves that reverted to the smoothed stats because every residual
  // sat on one side
  mutable long long linquad_fallbacks = 0;

 private:
  std::vector<double> linquad_scan(const LeafStats& st) const;

  LossResponseSpec spec_;
  int n_t_ = 0, n_p_ = 0;
  Matrix basis_;              // P or S; empty otherwise
  linalg::EigenCache cache_;  // I, lambda*D'D, or S'S depending on kind
  // L2 scan form: stat row u = scan_rot_ * eps, candidate loss
  // -1/2 sum u_j^2 / (a_j * n_l + b_j)
  Matrix scan_rot_;
  std::vector<double> scan_a_, scan_b_;
  std::vector<double> tau_per_coord_, shift_per_coord_;
};

// ---------------------------------------------------------------------
// spec-level operations

// Per-row gradients in parameter space, g~_i = -B' eps_i; pass an empty
// matrix for the identity basis. The per-row Hessian contribution is
// the constant B'B.
Matrix grad_hess_l2(const Matrix& residual, const Matrix& b);

// Smoothed pinball (g, h) at one residual; overflow-safe.
std::pair<double, double> smoothed_quantile_grad_hess(double residual, double tau);

struct LinQuadRow {
  double g, h;
};
// Per-row (g, h) of the leaf-adaptive linear-quadratic pinball loss.
// When every residual sits on one side the smoothed loss is used
// instead and `fell_back`, if given, is set.
std::vector<LinQuadRow> linquad_quantile_grad_hess(
    std::span<const double> leaf_residuals, double tau, double k_coef,
    bool* fell_back = nullptr);

// Exact training loss with the leaf-count penalty gamma * n_leaves:
// L2 kinds: 0.5*sum|y-yhat|^2 / N; quantile kinds: mean pinball over
// rows, horizons and taus.
double exact_loss(const Matrix& y, const Matrix& yhat,
                  const LossResponseSpec& spec, long long n_leaves_total,
                  double gamma);

// Empirical tau-quantiles of each horizon's leaf residuals; the n_q
// values of a horizon are rearranged nondecreasing so a tree never
// emits crossing quantiles.
std::vector<double> refit_quantile_leaf(const Matrix& leaf_residuals,
                                        std::span<const double> taus, int n_t);

// linear interpolation between order statistics
double empirical_quantile(std::vector<double> values, double tau);

}  // namespace mbt::loss
