#include "mbt/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mbt/kernels.hpp"

namespace mbt::metrics {

namespace {

void check_quantile_shapes(const Matrix& y, const Matrix& qhat,
                           const std::vector<double>& taus) {
  const int n_q = static_cast<int>(taus.size());
  if (n_q < 1) throw std::runtime_error("metrics: empty tau set");
  if (qhat.cols() != y.cols() * n_q || qhat.rows() != y.rows())
    throw std::runtime_error("metrics: quantile matrix shape mismatch");
}

}  // namespace

PointMetrics point_metrics(const Matrix& y, const Matrix& yhat) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols())
    throw std::runtime_error("point_metrics: shape mismatch");
  PointMetrics pm;
  const std::size_t n = y.size();
  if (n == 0) return pm;
  pm.rmse = std::sqrt(vec::active().sumsq_diff(y.data(), yhat.data(), n) /
                      static_cast<double>(n));
  double ape = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = y.data()[i];
    if (t == 0.0) {
      ++pm.mape_excluded;
      continue;
    }
    ape += std::fabs((t - yhat.data()[i]) / t);
    ++used;
  }
  if (used == 0) throw std::runtime_error("point_metrics: all targets are zero, MAPE undefined");
  pm.mape = ape / static_cast<double>(used);
  return pm;
}

Matrix avg_quantile_loss(const Matrix& y, const Matrix& qhat,
                         const std::vector<double>& taus) {
  check_quantile_shapes(y, qhat, taus);
  const int n_q = static_cast<int>(taus.size());
  const int n_t = y.cols();
  Matrix out(n_q, n_t);
  for (int i = 0; i < y.rows(); ++i)
    for (int t = 0; t < n_t; ++t)
      for (int qi = 0; qi < n_q; ++qi) {
        const double eps = y(i, t) - qhat(i, t * n_q + qi);
        const double ind = eps > 0.0 ? 1.0 : 0.0;
        out(qi, t) += (ind - taus[qi]) * eps;
      }
  for (std::size_t k = 0; k < out.size(); ++k)
    out.data()[k] /= static_cast<double>(y.rows());
  return out;
}

std::vector<double> quantile_score(const Matrix& y, const Matrix& qhat,
                                   const std::vector<double>& taus) {
  check_quantile_shapes(y, qhat, taus);
  const int n_q = static_cast<int>(taus.size());
  if (n_q < 2) throw std::runtime_error("quantile_score: need >= 2 taus");
  const double dtau = taus[1] - taus[0];
  for (int qi = 2; qi < n_q; ++qi)
    if (std::fabs((taus[qi] - taus[qi - 1]) - dtau) > 1e-9)
      throw std::runtime_error("quantile_score: taus must be equispaced");
  Matrix lq = avg_quantile_loss(y, qhat, taus);
  std::vector<double> qs(y.cols(), 0.0);
  for (int t = 0; t < y.cols(); ++t) {
    for (int qi = 0; qi < n_q; ++qi) qs[t] += lq(qi, t);
    qs[t] *= dtau;
  }
  return qs;
}

Reliability reliability(const Matrix& y, const Matrix& qhat,
                        const std::vector<double>& taus) {
  check_quantile_shapes(y, qhat, taus);
  const int n_q = static_cast<int>(taus.size());
  const int n_t = y.cols();
  Reliability r;
  r.per_tau_horizon = Matrix(n_q, n_t);
  for (int i = 0; i < y.rows(); ++i)
    for (int t = 0; t < n_t; ++t)
      for (int qi = 0; qi < n_q; ++qi)
        if (y(i, t) < qhat(i, t * n_q + qi)) r.per_tau_horizon(qi, t) += 1.0;
  for (std::size_t k = 0; k < r.per_tau_horizon.size(); ++k)
    r.per_tau_horizon.data()[k] /= static_cast<double>(y.rows());
  r.per_tau.assign(n_q, 0.0);
  for (int qi = 0; qi < n_q; ++qi) {
    for (int t = 0; t < n_t; ++t) r.per_tau[qi] += r.per_tau_horizon(qi, t);
    r.per_tau[qi] /= n_t;
  }
  return r;
}

Matrix reliability_skill(const Matrix& y, const Matrix& qhat_model,
                         const Matrix& qhat_benchmark,
                         const std::vector<double>& taus) {
  Reliability rm = reliability(y, qhat_model, taus);
  Reliability rb = reliability(y, qhat_benchmark, taus);
  const int n_q = static_cast<int>(taus.size());
  Matrix rs(n_q, y.cols());
  for (int qi = 0; qi < n_q; ++qi)
    for (int t = 0; t < y.cols(); ++t)
      rs(qi, t) = std::fabs(rb.per_tau_horizon(qi, t) - taus[qi]) -
                  std::fabs(rm.per_tau_horizon(qi, t) - taus[qi]);
  return rs;
}

double crossing_rate(const Matrix& qhat, int n_q) {
  if (n_q < 2) throw std::runtime_error("crossing_rate: need >= 2 quantiles");
  if (qhat.cols() % n_q != 0)
    throw std::runtime_error("crossing_rate: width not divisible by n_q");
  const int n_t = qhat.cols() / n_q;
  long long crossings = 0;
  for (int i = 0; i < qhat.rows(); ++i)
    for (int t = 0; t < n_t; ++t)
      for (int qi = 0; qi + 1 < n_q; ++qi)
        if (qhat(i, t * n_q + qi) > qhat(i, t * n_q + qi + 1)) ++crossings;
  const double pairs = static_cast<double>(qhat.rows()) * n_t * (n_q - 1);
  return pairs > 0 ? static_cast<double>(crossings) / pairs : 0.0;
}

}  // namespace mbt::metrics
