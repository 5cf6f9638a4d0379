#pragma once

#include <vector>

#include "mbt/matrix.hpp"

namespace mbt::metrics {

struct PointMetrics {
  double rmse = 0.0;
  double mape = 0.0;
  long long mape_excluded = 0;  // zero-target entries left out of MAPE
};

PointMetrics point_metrics(const Matrix& y, const Matrix& yhat);

// Mean pinball loss per (tau, horizon); qhat is N x (n_t * n_q) with
// taus contiguous per horizon. Result is n_q x n_t.
Matrix avg_quantile_loss(const Matrix& y, const Matrix& qhat,
                         const std::vector<double>& taus);

// Riemann aggregation of the quantile loss over an equispaced tau grid;
// one value per horizon.
std::vector<double> quantile_score(const Matrix& y, const Matrix& qhat,
                                   const std::vector<double>& taus);

struct Reliability {
  std::vector<double> per_tau;  // pooled over rows and horizons
  Matrix per_tau_horizon;       // n_q x n_t
};

Reliability reliability(const Matrix& y, const Matrix& qhat,
                        const std::vector<double>& taus);

// Rs = |r_tau(benchmark) - tau| - |r_tau(model) - tau|, positive when
// the model is more reliable; per (tau, horizon).
Matrix reliability_skill(const Matrix& y, const Matrix& qhat_model,
                         const Matrix& qhat_benchmark,
                         const std::vector<double>& taus);

// Mean rate of adjacent-quantile order violations q_{tau_i} > q_{tau_{i+1}}.
double crossing_rate(const Matrix& qhat, int n_q);

}  // namespace mbt::metrics
