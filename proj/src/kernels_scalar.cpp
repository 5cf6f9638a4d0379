#include "mbt/kernels.hpp"

#include <cmath>

namespace mbt::vec {

namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void add_scalar(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void logistic_grad_hess_scalar(const double* eps, const double* shift,
                               const double* tau, double* g, double* h,
                               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double z = eps[i] - shift[i];
    // t = exp(-|z|) keeps the exponent nonpositive
    double t = std::exp(-std::fabs(z));
    double inv = 1.0 / (1.0 + t);
    double f = (z >= 0.0) ? inv : t * inv;
    g[i] = 1.0 - tau[i] - f;
    h[i] = t * inv * inv;
  }
}

double pinball_sum_scalar(const double* eps, const double* tau, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double ind = eps[i] > 0.0 ? 1.0 : 0.0;
    s += (ind - tau[i]) * eps[i];
  }
  return s;
}

}  // namespace

const Kernels& scalar() {
  static const Kernels k = {
      "scalar",         sum_scalar,  dot_scalar,
      sumsq_diff_scalar, add_scalar, sub_scalar,
      axpy_scalar,      logistic_grad_hess_scalar, pinball_sum_scalar,
  };
  return k;
}

}  // namespace mbt::vec
