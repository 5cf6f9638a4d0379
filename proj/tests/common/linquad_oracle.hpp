#pragma once

// Brute-force grid oracle for the linear-quadratic pinball loss: the
// exact mean loss L(q) over a sample is evaluated on a dense grid via
// prefix sums, independent of the library's leaf-statistic path. The
// minimizer must land within one inter-order-statistic gap of the
// empirical quantile.

#include <algorithm>
#include <cmath>
#include <vector>

namespace testutil {

struct LinquadOracleResult {
  double minimizer = 0.0;
  double quantile = 0.0;
  double gap = 0.0;  // widest adjacent order-statistic gap at the quantile
  bool within_one_gap = false;
};

class LinquadLoss {
 public:
  LinquadLoss(std::vector<double> sample, double tau, double k)
      : x_(std::move(sample)), tau_(tau), k_(k) {
    std::sort(x_.begin(), x_.end());
    prefix_.resize(x_.size() + 1, 0.0);
    prefix_sq_.resize(x_.size() + 1, 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      prefix_[i + 1] = prefix_[i] + x_[i];
      prefix_sq_[i + 1] = prefix_sq_[i] + x_[i] * x_[i];
    }
  }

  // sum over the sample of the linear-quadratic loss at threshold q
  double operator()(double q) const {
    const auto n = static_cast<long long>(x_.size());
    const long long nl =
        std::lower_bound(x_.begin(), x_.end(), q) - x_.begin();  // x_i < q
    const long long nr = n - nl;
    double loss = 0.0;
    if (nl > 0) {
      const double sum_l = prefix_[nl] - nl * q;  // sum of eps < 0
      const double sq_l =
          prefix_sq_[nl] - 2.0 * q * prefix_[nl] + nl * q * q;
      loss += (tau_ - 1.0) * sum_l;
      if (sum_l < 0.0) loss += k_ * sq_l / (2.0 * (-sum_l));
    }
    if (nr > 0) {
      const double sum_r = (prefix_[n] - prefix_[nl]) - nr * q;
      const double sq_r = (prefix_sq_[n] - prefix_sq_[nl]) -
                          2.0 * q * (prefix_[n] - prefix_[nl]) + nr * q * q;
      loss += tau_ * sum_r;
      if (sum_r > 0.0) loss += k_ * sq_r / (2.0 * sum_r);
    }
    return loss;
  }

  const std::vector<double>& sorted() const { return x_; }

 private:
  std::vector<double> x_;
  double tau_, k_;
  std::vector<double> prefix_, prefix_sq_;
};

inline double interp_quantile(const std::vector<double>& sorted, double tau) {
  const std::size_t n = sorted.size();
  double pos = tau * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo >= n - 1) return sorted[n - 1];
  return sorted[lo] + (pos - lo) * (sorted[lo + 1] - sorted[lo]);
}

inline LinquadOracleResult linquad_grid_oracle(std::vector<double> sample,
                                               double tau, double k,
                                               int grid_points = 20000) {
  LinquadLoss loss(std::move(sample), tau, k);
  const auto& x = loss.sorted();
  const double lo = x.front(), hi = x.back();

  double best_q = lo, best_l = loss(lo);
  auto consider = [&](double q) {
    double l = loss(q);
    if (l < best_l) {
      best_l = l;
      best_q = q;
    }
  };
  for (int i = 1; i <= grid_points; ++i)
    consider(lo + (hi - lo) * i / grid_points);
  for (double q : x) consider(q);

  LinquadOracleResult r;
  r.minimizer = best_q;
  r.quantile = interp_quantile(x, tau);
  auto j = static_cast<std::size_t>(tau * static_cast<double>(x.size() - 1));
  double gap_right = j + 1 < x.size() ? x[j + 1] - x[j] : 0.0;
  double gap_left = j > 0 ? x[j] - x[j - 1] : 0.0;
  r.gap = std::max(gap_left, gap_right);
  r.within_one_gap = std::fabs(r.minimizer - r.quantile) <= r.gap;
  return r;
}

}  // namespace testutil
